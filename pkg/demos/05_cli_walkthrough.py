"""
The command-line pipeline end to end
====================================

simulate -> validate -> fit -> frontier -> neff -> report, all through the
`mixlaw` CLI (here invoked in-process). The same flow works from a shell:

    mixlaw simulate --out data.jsonl --noise 0.003 --seed 7
    mixlaw validate --input data.jsonl
    mixlaw fit --input data.jsonl --tasks task-a,task-b --out laws.json
    mixlaw frontier --bundle laws.json --n 1e9 --out frontier.csv
    mixlaw neff --bundle laws.json --n 1e9
    mixlaw report --bundle laws.json --out-dir report/
    mixlaw serve --bundle laws.json --port 8351   # then open the explorer UI
"""

from pathlib import Path

from mixlaw.cli import main

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)
data = OUT / "demo_data.jsonl"
bundle = OUT / "demo_laws.json"

steps = [
    ["simulate", "--out", str(data), "--noise", "0.003", "--seed", "7"],
    ["validate", "--input", str(data)],
    ["fit", "--input", str(data), "--tasks", "task-a,task-b",
     "--seed", "7", "--bootstrap", "8", "--out", str(bundle)],
    ["frontier", "--bundle", str(bundle), "--n", "1e9",
     "--out", str(OUT / "demo_frontier.csv")],
    ["neff", "--bundle", str(bundle), "--n", "1e9"],
    ["report", "--bundle", str(bundle), "--out-dir", str(OUT / "demo_report")],
]

for argv in steps:
    print(f"\n$ mixlaw {' '.join(argv)}")
    code = main(argv)
    if code != 0:
        raise SystemExit(f"step failed with exit code {code}")

print("\nall steps completed; artifacts in", OUT)
