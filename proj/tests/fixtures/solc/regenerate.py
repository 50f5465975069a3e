#!/usr/bin/env python3
"""Rebuild the compiler AST fixtures in this directory.

Usage: regenerate.py <path-to-gscan-binary>

Every *.sol here, plus the synthetic contracts produced by
`gscan build-dataset --synthetic 6,6 --seed 2024`, is compiled with the
compiler named by $GSCAN_SOLC (default: solc) through --standard-json and
stored as an envelope <stem>.json next to it. Synthetic sources land under
synthetic/.
"""
import json
import os
import pathlib
import re
import subprocess
import sys
import tempfile

HERE = pathlib.Path(__file__).resolve().parent
SYNTHETIC_SEED = 2024
SYNTHETIC_COUNTS = "6,6"


def compile_source(solc, path):
    source = path.read_text()
    request = {
        "language": "Solidity",
        "sources": {path.name: {"content": source}},
        "settings": {"outputSelection": {"*": {"": ["ast"]}}},
    }
    # solcjs truncates piped stdout at 64 KiB, so capture through a file.
    with tempfile.TemporaryFile("w+") as out:
        subprocess.run([solc, "--standard-json"], input=json.dumps(request), stdout=out, text=True, check=True)
        out.seek(0)
        text = out.read()
    result = json.loads(text[text.index("{"):])
    errors = [e for e in result.get("errors", []) if e.get("severity") == "error"]
    if errors:
        sys.exit(f"{path}: {errors[0].get('formattedMessage')}")
    version = subprocess.run([solc, "--version"], capture_output=True, text=True, check=True).stdout
    return {
        "compilerVersion": re.search(r"\d+\.\d+\.\d+", version).group(0),
        "sourcePath": path.name,
        "source": source,
        "ast": result["sources"][path.name]["ast"],
    }


def main():
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    gscan = sys.argv[1]
    solc = os.environ.get("GSCAN_SOLC", "solc")

    synthetic = HERE / "synthetic"
    synthetic.mkdir(exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([gscan, "build-dataset", "--out", tmp, "--synthetic", SYNTHETIC_COUNTS,
                        "--seed", str(SYNTHETIC_SEED)], check=True, stdout=subprocess.DEVNULL)
        for old in synthetic.glob("*"):
            old.unlink()
        for sol in sorted(pathlib.Path(tmp, "sources").glob("*.sol")):
            (synthetic / sol.name).write_text(sol.read_text())

    for sol in sorted(list(HERE.glob("*.sol")) + list(synthetic.glob("*.sol"))):
        envelope = compile_source(solc, sol)
        sol.with_suffix(".json").write_text(json.dumps(envelope, indent=1) + "\n")
        print(sol.relative_to(HERE))


if __name__ == "__main__":
    main()
