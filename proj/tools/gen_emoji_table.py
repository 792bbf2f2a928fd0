"""Regenerate data/emoji_aliases.tsv from the `emoji` package.

Aliases are folded to lowercase ASCII [a-z0-9_] so every alias token matches
the :name: pattern used by the normalizer. The output is sorted by codepoint
sequence so regenerating with the same package version is byte-stable.
"""
import argparse
import re
import unicodedata

import emoji


def fold_alias(name: str) -> str:
    name = unicodedata.normalize("NFKD", name.strip(":"))
    name = name.encode("ascii", "ignore").decode("ascii").lower()
    name = re.sub(r"[^a-z0-9_]+", "_", name)
    name = re.sub(r"_+", "_", name).strip("_")
    return f":{name}:"


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default="data/emoji_aliases.tsv")
    args = parser.parse_args()

    rows = {}
    for seq, data in emoji.EMOJI_DATA.items():
        key = " ".join(f"{ord(c):X}" for c in seq)
        rows[key] = fold_alias(data["en"])

    def sort_key(item):
        return [int(cp, 16) for cp in item[0].split()]

    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# emoji alias table v1, generated from emoji {emoji.__version__}\n")
        for key, alias in sorted(rows.items(), key=sort_key):
            fh.write(f"{key}\t{alias}\n")


if __name__ == "__main__":
    main()
