#!/usr/bin/env python3
"""Regenerate the shipped English test lexicon.

Counts words in the docstring prose of locally installed Python libraries
(a large body of real English text that needs no network access), keeps the
most frequent words, and writes "word<TAB>count" lines. Single letters other
than 'a' and 'i' are dropped; everything else is lowercased a-z only.

Usage: python tools/build_lexicon.py [output_path]
"""

import ast
import collections
import re
import sys
import sysconfig
from pathlib import Path

TOP_N = 10000
MAX_FILES_PER_ROOT = 4000
WORD_RE = re.compile(r"[a-z]+")


def iter_docstrings(path: Path):
    try:
        tree = ast.parse(path.read_text(encoding="utf-8", errors="ignore"))
    except SyntaxError:
        return
    for node in ast.walk(tree):
        if isinstance(node, (ast.Module, ast.FunctionDef, ast.AsyncFunctionDef, ast.ClassDef)):
            doc = ast.get_docstring(node)
            if doc:
                yield doc


def main() -> None:
    out_path = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(
        __file__
    ).resolve().parent.parent / "src" / "taptype" / "assets" / "lexicon_en.txt"
    roots = [Path(sysconfig.get_paths()["stdlib"]), Path(sysconfig.get_paths()["purelib"])]
    counter: collections.Counter[str] = collections.Counter()
    for root in roots:
        files = sorted(root.rglob("*.py"))[:MAX_FILES_PER_ROOT]
        for path in files:
            for doc in iter_docstrings(path):
                counter.update(WORD_RE.findall(doc.lower()))
    for junk in [w for w in counter if len(w) == 1 and w not in ("a", "i")]:
        del counter[junk]
    top = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))[:TOP_N]
    with open(out_path, "w") as f:
        for word, count in top:
            f.write(f"{word}\t{count}\n")
    print(f"wrote {len(top)} words to {out_path}")


if __name__ == "__main__":
    main()
