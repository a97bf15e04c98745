//! Hand-lexed Java snippets: each lists the normalized text and line span
//! of every comment block a reader would see.

use onhold::miner::extract_comments;

fn blocks(src: &str) -> Vec<(String, usize, usize)> {
    extract_comments(src)
        .into_iter()
        .map(|b| (b.normalized_text, b.start_line, b.end_line))
        .collect()
}

fn check(src: &str, want: &[(&str, usize, usize)]) {
    let want: Vec<(String, usize, usize)> = want.iter().map(|&(t, s, e)| (t.to_string(), s, e)).collect();
    assert_eq!(blocks(src), want, "source:\n{src}");
}

#[test]
fn corpus() {
    type Case<'a> = (&'a str, &'a [(&'a str, usize, usize)]);
    let cases: &[Case] = &[
        ("int x; // trailing", &[("trailing", 1, 1)]),
        ("/* one */", &[("one", 1, 1)]),
        ("/**\n * Javadoc line.\n * @param a the a\n */", &[("Javadoc line. @param a the a", 1, 4)]),
        ("// a\n// b\nint x;\n// c", &[("a b", 1, 2), ("c", 4, 4)]),
        ("// a\n\n   // b", &[("a b", 1, 3)]),
        ("/* a */ /* b */", &[("a b", 1, 1)]),
        ("String s = \"// not a comment\";", &[]),
        ("String s = \"/* nor this */\"; // real", &[("real", 1, 1)]),
        ("char c = '\"'; // after char", &[("after char", 1, 1)]),
        ("char c = '\\''; // escaped quote", &[("escaped quote", 1, 1)]),
        ("String s = \"a\\\"b // still string\"; // tail", &[("tail", 1, 1)]),
        ("String t = \"\"\"\n  // inside text block\n  \"\"\"; // out", &[("out", 3, 3)]),
        ("/* unterminated\n still going", &[("unterminated still going", 1, 2)]),
        ("x = a / b; // divide", &[("divide", 1, 1)]),
        ("/* a // b */", &[("a // b", 1, 1)]),
        ("// a /* b */", &[("a /* b */", 1, 1)]),
        ("/* a */ int x; /* b */", &[("a", 1, 1), ("b", 1, 1)]),
        ("/*\n\n*/", &[("", 1, 3)]),
        ("class A {}\n", &[]),
        ("int y; //// banner ////", &[("banner ////", 1, 1)]),
        ("String u = \"http://x.org\"; // see http://y.org", &[("see http://y.org", 1, 1)]),
    ];
    for (src, want) in cases {
        check(src, want);
    }
}

#[test]
fn unterminated_block_is_flagged() {
    let b = extract_comments("/* open");
    assert!(b[0].unterminated);
    assert!(!extract_comments("/* shut */")[0].unterminated);
}

#[test]
fn raw_text_keeps_delimiters() {
    let b = extract_comments("int x; /* keep */ // this");
    assert_eq!(b[0].raw_text, "/* keep */ // this");
}
