#!/usr/bin/env python3
"""Dump a git repository's commit history as CommitDump JSON.

This is the only place that touches a live repository; the C++ library and the
CLI consume the dump. Schema:

    {"commits": [{"id": str, "bytes": int, "parents": [str]}],
     "deltas":  [{"from": str, "to": str, "bytes": int}]}

Cost definitions used here (the library does not care, but tests of real dumps
do, so they are pinned):
  - commit bytes: sum of blob sizes in the commit's tree,
    `git ls-tree -r --long <commit>`.
  - delta bytes from A to B: length in bytes of `git diff A B` (unified patch
    text, default context). Both directions are emitted per parent-child pair.

Usage: git_dump.py [--repo PATH] [--out PATH]
"""

import argparse
import json
import subprocess
import sys


def git(repo, *args):
    return subprocess.run(
        ["git", "-C", repo, *args], check=True, capture_output=True
    ).stdout


def tree_bytes(repo, commit):
    total = 0
    for line in git(repo, "ls-tree", "-r", "--long", commit).decode().splitlines():
        meta = line.split("\t", 1)[0].split()
        if len(meta) >= 4 and meta[1] == "blob":
            total += int(meta[3])
    return total


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repo", default=".", help="repository path (default: cwd)")
    ap.add_argument("--out", default="-", help="output file (default: stdout)")
    args = ap.parse_args()

    commits = []
    deltas = []
    log = git(args.repo, "log", "--all", "--topo-order", "--reverse", "--format=%H %P")
    for line in log.decode().splitlines():
        parts = line.split()
        cid, parents = parts[0], parts[1:]
        commits.append({"id": cid, "bytes": tree_bytes(args.repo, cid), "parents": parents})
        for p in parents:
            deltas.append({"from": p, "to": cid, "bytes": len(git(args.repo, "diff", p, cid))})
            deltas.append({"from": cid, "to": p, "bytes": len(git(args.repo, "diff", cid, p))})

    dump = json.dumps({"commits": commits, "deltas": deltas}, indent=1)
    if args.out == "-":
        print(dump)
    else:
        with open(args.out, "w") as f:
            f.write(dump + "\n")


if __name__ == "__main__":
    sys.exit(main())
