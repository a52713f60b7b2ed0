"""End-to-end checks of the envar-kit executable.

usage: cli_end_to_end.py <envar-kit> <score.schema.json>
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

EXE = sys.argv[1]
SCHEMA = json.loads(Path(sys.argv[2]).read_text())
failures = []


def run(*args):
    return subprocess.run([EXE, *map(str, args)], capture_output=True, text=True)


def check(cond, msg):
    print(("ok   " if cond else "FAIL ") + msg)
    if not cond:
        failures.append(msg)


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    manifest = {
        "format_version": "envar-kit/1",
        "generator": {"p": 3, "t_len": 300, "episodes": 2, "seed": 11},
        "envar": {"max_steps": 500, "restarts": 1},
        "baselines": [{"name": "eqvar-gds"}],
        "output_dir": str(tmp / "default_out"),
    }
    (tmp / "m.json").write_text(json.dumps(manifest))

    r = run("simulate", "--manifest", tmp / "m.json", "--output", tmp / "sim")
    check(r.returncode == 0, "simulate exits 0")
    ep0 = tmp / "sim" / "p3_sstd0" / "ep0"
    check((ep0 / "series.csv").exists() and (tmp / "sim" / "p3_sstd0" / "ep1").exists(),
          "simulate writes one directory per episode")
    rows = (ep0 / "series.csv").read_text().splitlines()
    check(rows[0] == "t,x1,x2,x3" and len(rows) == 301, "series.csv has a header and T rows")

    for method in ("envar", "eqvar-gds", "ols-only"):
        out = tmp / f"fit_{method}"
        r = run("fit", ep0 / "series.csv", "--method", method, "--output", out, "--seed", 1)
        check(r.returncode == 0 and (out / "model.json").exists() and (out / "fit_report.json").exists(),
              f"fit --method {method} writes model.json and fit_report.json")
        r = run("evaluate", out / "model.json", ep0 / "truth_model.json", "--output", out / "score.json")
        check(r.returncode == 0, f"evaluate {method} exits 0")
        score = json.loads((out / "score.json").read_text())
        try:
            jsonschema.validate(score, SCHEMA)
            check(True, f"{method} score.json validates against the schema")
        except jsonschema.ValidationError as e:
            check(False, f"{method} score.json validates against the schema: {e.message}")

    r = run("evaluate", ep0 / "truth_model.json", ep0 / "truth_model.json")
    check(r.returncode == 0 and json.loads(r.stdout)["sf_oad"] <= 1e-12, "truth scored against itself gives 0 up to roundoff")

    r = run("benchmark", "--manifest", tmp / "m.json", "--output", tmp / "bench", "--jobs", 2)
    summary = (tmp / "bench" / "summary.csv").read_text().splitlines()
    check(r.returncode == 0 and len(summary) == 1 + 2 * 2, "benchmark writes one row per method and episode")
    check((tmp / "bench" / "summary_agg.csv").exists(), "benchmark writes the aggregate CSV")

    # exit codes: 1 usage, 2 data, 3 numerical
    r = run("fit", tmp / "missing.csv", "--output", tmp / "x")
    check(r.returncode == 2 and r.stderr.strip() != "", "missing series file exits 2 with a message")
    r = run("frobnicate")
    check(r.returncode == 1, "unknown subcommand exits 1")
    r = run("fit", ep0 / "series.csv", "--method", "dynotears", "--output", tmp / "x")
    check(r.returncode == 1, "unknown method exits 1")
    (tmp / "bad.csv").write_text("t,x1,x2\n0,1,2\n1,3\n")
    r = run("fit", tmp / "bad.csv", "--output", tmp / "x")
    check(r.returncode == 2 and "line 3" in r.stderr, "malformed CSV exits 2 and names the line")
    (tmp / "bad.json").write_text(json.dumps({**manifest, "generator": {"p": 3, "bogus": 1}}))
    r = run("simulate", "--manifest", tmp / "bad.json", "--output", tmp / "x")
    check(r.returncode != 0 and "generator.bogus" in r.stderr, "unknown manifest field is rejected by path")
    flat = "t,x1,x2\n" + "".join(f"{t},1,{t % 2}\n" for t in range(40))
    (tmp / "flat.csv").write_text(flat)
    r = run("fit", tmp / "flat.csv", "--method", "ols-only", "--output", tmp / "x")
    check(r.returncode == 3, "rank-deficient series exits 3")

sys.exit(1 if failures else 0)
