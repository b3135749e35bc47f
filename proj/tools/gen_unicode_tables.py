#!/usr/bin/env python3
"""Regenerate src/unicode_tables.inc (code point ranges for \\p{L} and \\p{N})."""

import pathlib
import sys
import unicodedata


def ranges(pred):
    out, start = [], None
    for cp in range(0x110000):
        hit = pred(unicodedata.category(chr(cp)))
        if hit and start is None:
            start = cp
        elif not hit and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def emit(name, rs):
    body = ",\n".join(f"    {{0x{lo:05X}, 0x{hi:05X}}}" for lo, hi in rs)
    return f"inline constexpr CodePointRange {name}[] = {{\n{body}\n}};\n"


def main():
    target = pathlib.Path(sys.argv[1]) if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parents[1] / "src" / "unicode_tables.inc"
    text = (
        f"// Generated by tools/gen_unicode_tables.py from Unicode {unicodedata.unidata_version}. Do not edit.\n\n"
        + emit("kLetterRanges", ranges(lambda c: c.startswith("L")))
        + "\n"
        + emit("kNumberRanges", ranges(lambda c: c.startswith("N")))
    )
    target.write_text(text, encoding="utf-8")


if __name__ == "__main__":
    main()
