#!/usr/bin/env python3
"""Regenerate crates/core/data/pinyin_gb2312.tsv.

Covers the 6,763 characters of GB2312 levels 1 and 2 (level 1 is the 3,755
most frequent characters). Each entry carries the toneless default reading,
with u-umlaut written as `v`.

Requires `pypinyin`.
"""
import sys
from pypinyin import Style, lazy_pinyin

VERSION = 1


def gb2312_chars():
    for hi in range(0xB0, 0xF8):
        for lo in range(0xA1, 0xFF):
            try:
                ch = bytes([hi, lo]).decode("gb2312")
            except UnicodeDecodeError:
                continue
            yield ch


def main(out):
    rows = []
    for ch in gb2312_chars():
        reading = lazy_pinyin(ch, style=Style.NORMAL, errors="ignore")
        if not reading or not reading[0].isascii() or not reading[0].isalpha():
            continue
        rows.append(f"{ch}\t{reading[0].lower()}")
    with open(out, "w", encoding="utf-8") as f:
        f.write(f"# pinyin table v{VERSION}: GB2312 levels 1-2, toneless default readings\n")
        f.write("\n".join(rows))
        f.write("\n")
    print(f"wrote {len(rows)} entries", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/data/pinyin_gb2312.tsv")
