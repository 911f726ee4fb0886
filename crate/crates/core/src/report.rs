//! Ranked output files.

use std::fmt::Write;

use crate::ranking::RankedList;

pub const RANK_HEADER: &str = "position,patch_id,provenance,score";

/// CSV with one row per patch, best first. Scores are exact fractions in
/// lowest terms; `-` marks W patches and classes with no evidence.
pub fn render_rank_csv(list: &RankedList) -> String {
    let mut out = String::with_capacity(32 * (list.entries.len() + 1));
    out.push_str(RANK_HEADER);
    out.push('\n');
    for e in &list.entries {
        let score = e.score.map_or_else(|| "-".to_owned(), |s| s.reduced().to_string());
        writeln!(out, "{},{},{},{}", e.position, e.patch, e.provenance, score).expect("writing to a String");
    }
    out
}

/// One patch id per line, best first.
pub fn render_plain(list: &RankedList) -> String {
    list.entries.iter().map(|e| format!("{}\n", e.patch)).collect()
}
