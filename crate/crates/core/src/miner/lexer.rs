//! Comment extraction for Java source.
//!
//! The lexer only tracks enough state to tell comments apart from string,
//! char and text-block literals. It never fails: an unterminated block
//! comment runs to the end of the input and is flagged on the block.

use serde::{Deserialize, Serialize};

/// A contiguous comment region in one file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommentBlock {
    pub file_path: String,
    /// 1-based, inclusive.
    pub start_line: usize,
    pub end_line: usize,
    /// Exact comment text including delimiters. Merged pieces keep the
    /// whitespace that separated them in the source.
    pub raw_text: String,
    /// Delimiter-stripped text, one space between comment lines.
    pub normalized_text: String,
    pub unterminated: bool,
}

impl CommentBlock {
    /// Normalized text with every whitespace run collapsed to one space.
    /// Used as the identity of a comment across commits.
    pub fn identity_text(&self) -> String {
        collapse_whitespace(&self.normalized_text)
    }
}

pub(crate) fn collapse_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PieceKind {
    Line,
    Block,
}

#[derive(Debug)]
struct Piece {
    kind: PieceKind,
    start: usize,
    end: usize,
    unterminated: bool,
}

/// Extract every comment block from `source`, in file order.
///
/// Comments separated only by whitespace are merged into one block.
pub fn extract_comments(source: &str) -> Vec<CommentBlock> {
    extract_comments_in(source, "")
}

/// Same as [`extract_comments`] but stamps `file_path` on each block.
pub fn extract_comments_in(source: &str, file_path: &str) -> Vec<CommentBlock> {
    let pieces = lex_pieces(source.as_bytes());
    let newlines: Vec<usize> = source.bytes().enumerate().filter(|&(_, b)| b == b'\n').map(|(i, _)| i).collect();
    let mut blocks = Vec::new();
    let mut group: Vec<&Piece> = Vec::new();
    for piece in &pieces {
        if let Some(last) = group.last() {
            let gap = &source[last.end..piece.start];
            if !gap.chars().all(char::is_whitespace) {
                blocks.push(build_block(source, &newlines, file_path, &group));
                group.clear();
            }
        }
        group.push(piece);
    }
    if !group.is_empty() {
        blocks.push(build_block(source, &newlines, file_path, &group));
    }
    blocks
}

fn lex_pieces(src: &[u8]) -> Vec<Piece> {
    let mut pieces = Vec::new();
    let mut i = 0;
    let n = src.len();
    while i < n {
        match src[i] {
            b'/' if i + 1 < n && src[i + 1] == b'/' => {
                let start = i;
                while i < n && src[i] != b'\n' && src[i] != b'\r' {
                    i += 1;
                }
                pieces.push(Piece {
                    kind: PieceKind::Line,
                    start,
                    end: i,
                    unterminated: false,
                });
            }
            b'/' if i + 1 < n && src[i + 1] == b'*' => {
                let start = i;
                i += 2;
                let mut closed = false;
                while i < n {
                    if src[i] == b'*' && i + 1 < n && src[i + 1] == b'/' {
                        i += 2;
                        closed = true;
                        break;
                    }
                    i += 1;
                }
                pieces.push(Piece {
                    kind: PieceKind::Block,
                    start,
                    end: i.min(n),
                    unterminated: !closed,
                });
            }
            b'"' if src[i..].starts_with(b"\"\"\"") => {
                i += 3;
                while i < n {
                    if src[i] == b'\\' {
                        i += 2;
                    } else if src[i..].starts_with(b"\"\"\"") {
                        i += 3;
                        break;
                    } else {
                        i += 1;
                    }
                }
            }
            quote @ (b'"' | b'\'') => {
                i += 1;
                while i < n {
                    match src[i] {
                        b'\\' => i += 2,
                        // Literals cannot span lines; stop so a stray quote
                        // does not swallow the rest of the file.
                        b'\n' | b'\r' => break,
                        c if c == quote => {
                            i += 1;
                            break;
                        }
                        _ => i += 1,
                    }
                }
            }
            _ => i += 1,
        }
    }
    pieces
}

fn build_block(source: &str, newlines: &[usize], file_path: &str, group: &[&Piece]) -> CommentBlock {
    let first = group[0];
    let last = group[group.len() - 1];
    let raw_text = source[first.start..last.end].to_string();
    let start_line = line_of(newlines, first.start);
    let end_line = line_of(newlines, last.end.saturating_sub(1).max(first.start));
    let mut lines = Vec::new();
    for piece in group {
        let text = &source[piece.start..piece.end];
        match piece.kind {
            PieceKind::Line => lines.push(text.trim_start_matches('/').trim().to_string()),
            PieceKind::Block => {
                let body = text.strip_prefix("/*").unwrap_or(text);
                let body = if piece.unterminated {
                    body
                } else {
                    body.strip_suffix("*/").unwrap_or(body)
                };
                for line in body.lines() {
                    let line = line.trim();
                    let line = line.trim_start_matches('*').trim();
                    lines.push(line.to_string());
                }
            }
        }
    }
    let normalized_text = lines
        .into_iter()
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    CommentBlock {
        file_path: file_path.to_string(),
        start_line,
        end_line,
        raw_text,
        normalized_text,
        unterminated: group.iter().any(|p| p.unterminated),
    }
}

/// 1-based line of `byte_offset`, given the offsets of every `\n`.
fn line_of(newlines: &[usize], byte_offset: usize) -> usize {
    1 + newlines.partition_point(|&nl| nl < byte_offset)
}

/// Test sources are skipped when mining.
///
/// A path is a test path when any directory segment is `test` or `tests`,
/// or the file name looks like `Test*.java`, `*Test.java`, `*Tests.java` or
/// `*TestCase.java`. Letter case is ignored, but the `Test` part has to sit
/// on a word boundary (camel-case hump, `_`, digit or the name edge), so
/// `Contest.java` and `Testament.java` are not test files.
pub fn is_test_file(path: &str) -> bool {
    let segments: Vec<&str> = path.split(['/', '\\']).filter(|s| !s.is_empty()).collect();
    let Some((file, dirs)) = segments.split_last() else {
        return false;
    };
    if dirs
        .iter()
        .any(|d| d.eq_ignore_ascii_case("test") || d.eq_ignore_ascii_case("tests"))
    {
        return true;
    }
    let Some(stem) = file
        .len()
        .checked_sub(5)
        .filter(|&cut| file.is_char_boundary(cut) && file[cut..].eq_ignore_ascii_case(".java"))
        .map(|cut| &file[..cut])
    else {
        return false;
    };
    let lower = stem.to_ascii_lowercase();
    let bytes = stem.as_bytes();
    // Boundary before a suffix starting at `at`.
    let starts_word = |at: usize| at == 0 || bytes[at].is_ascii_uppercase() || !bytes[at - 1].is_ascii_lowercase();
    // Boundary after a prefix ending at `at`.
    let ends_word = |at: usize| at == bytes.len() || !bytes[at].is_ascii_lowercase();

    if lower.starts_with("test") && ends_word(4) {
        return true;
    }
    ["test", "tests", "testcase"].iter().any(|suffix| {
        lower.ends_with(suffix) && starts_word(lower.len() - suffix.len())
    })
}
