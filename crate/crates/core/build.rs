use std::env;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

fn main() {
    let src = "data/pinyin_gb2312.tsv";
    println!("cargo:rerun-if-changed={src}");
    let text = fs::read_to_string(src).expect("read pinyin table");

    let mut version = None;
    let mut rows: Vec<(char, String)> = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if let Some(header) = line.strip_prefix('#') {
            if version.is_none() {
                version = header
                    .split_whitespace()
                    .find_map(|w| w.strip_prefix('v').and_then(|v| v.trim_end_matches(':').parse::<u32>().ok()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (ch, reading) = line
            .split_once('\t')
            .unwrap_or_else(|| panic!("{src}:{}: expected <char>\\t<pinyin>", n + 1));
        let mut chars = ch.chars();
        let c = chars.next().expect("empty character field");
        assert!(chars.next().is_none(), "{src}:{}: multi-char key", n + 1);
        assert!(reading.bytes().all(|b| b.is_ascii_lowercase()), "{src}:{}: bad reading", n + 1);
        rows.push((c, reading.to_string()));
    }
    rows.sort_by_key(|(c, _)| *c);
    rows.dedup_by_key(|(c, _)| *c);

    let mut out = String::new();
    writeln!(out, "pub(crate) const TABLE_VERSION: u32 = {};", version.unwrap_or(0)).unwrap();
    writeln!(out, "pub(crate) static TABLE: &[(char, &str)] = &[").unwrap();
    for (c, r) in &rows {
        writeln!(out, "    ({:?}, {:?}),", c, r).unwrap();
    }
    writeln!(out, "];").unwrap();

    let dest = Path::new(&env::var("OUT_DIR").unwrap()).join("pinyin_table.rs");
    fs::write(dest, out).unwrap();
}
