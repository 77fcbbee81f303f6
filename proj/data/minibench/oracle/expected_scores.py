#!/usr/bin/env python3
"""Expected per-question scores for the replay recordings, computed without
the C++ code: each recording is executed under CPython with fixture-backed
tool stubs, and answers are scored with scipy's assignment solver.

    python3 expected_scores.py [--trials 3] [--seed 42]

Writes ../expected_scores.json.
"""
import argparse
import ast
import builtins
import contextlib
import io
import json
import math
import random
import sys
import tempfile
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment
from shapely.geometry import Polygon

HERE = Path(__file__).resolve().parent
BENCH = HERE.parent
REPO = BENCH.parent.parent
ALLOWED = {"json", "math", "pathlib", "random", "statistics"}
CATEGORIES = ["DataQA", "CellularQA", "PatchQA", "SlideQA"]
MAX_STEPS = 20


class FinalAnswer(Exception):
    pass


def question_seed(seed, trial, qid):
    h = 14695981039346656037
    for b in f"{seed}:{trial}:{qid}".encode():
        h ^= b
        h = (h * 1099511628211) % (1 << 64)
    return h


# ---- tool stubs -------------------------------------------------------------

class Tools:
    def __init__(self, dataset, workdir):
        self.dataset = dataset
        self.workdir = workdir
        self.catalog = {t["name"]: t for t in json.loads((REPO / "assets" / "tool_catalog.json").read_text())["tools"]}
        self.records = {}
        for d in (dataset / "fixtures").iterdir():
            recs = []
            for f in sorted(d.glob("*.json")):
                recs += json.loads(f.read_text())
            self.records[d.name] = recs

    def canon(self, v):
        if isinstance(v, Path):
            v = str(v)
        if isinstance(v, str):
            if not v or not ("/" in v) or v.startswith("{"):
                return v
            p = Path(v) if v.startswith("/") else self.workdir / v
            p = Path(*[part for part in p.parts])  # keep lexical form
            import os.path
            p = Path(os.path.normpath(str(p)))
            try:
                rel = p.relative_to(self.dataset)
                return "{dataset}" if str(rel) == "." else "{dataset}/" + rel.as_posix()
            except ValueError:
                pass
            try:
                rel = p.relative_to(self.workdir)
                return "{working_dir}" if str(rel) == "." else "{working_dir}/" + rel.as_posix()
            except ValueError:
                return v
        if isinstance(v, (list, tuple)):
            return [self.canon(e) for e in v]
        if isinstance(v, dict):
            return {str(k): self.canon(e) for k, e in v.items()}
        return v

    def bind(self, name, args, kwargs):
        params = self.catalog[name]["params"]
        bound = {}
        for p, a in zip(params, args):
            bound[p["name"]] = a
        bound.update(kwargs)
        for p in params:
            if p["name"] not in bound:
                if "default" not in p:
                    raise TypeError(f"{name}() missing {p['name']}")
                bound[p["name"]] = p["default"]
        return bound

    def key(self, name, bound):
        params = {p["name"]: p for p in self.catalog[name]["params"]}
        kept = {k: v for k, v in bound.items() if not ("default" in params[k] and params[k]["default"] == v)}
        return json.dumps(kept, sort_keys=True)

    def expand(self, v):
        if isinstance(v, str):
            return v.replace("{dataset}", str(self.dataset)).replace("{working_dir}", str(self.workdir))
        if isinstance(v, list):
            return [self.expand(e) for e in v]
        if isinstance(v, dict):
            return {k: self.expand(e) for k, e in v.items()}
        return v

    def call(self, name, *args, **kwargs):
        bound = self.bind(name, args, kwargs)
        if name in ("get_contour_area", "get_contour_perimeter", "get_contour_convex_hull"):
            pts = [tuple(map(float, p)) for p in bound["contour"]]
            if len(pts) > 1 and pts[0] == pts[-1]:
                pts = pts[:-1]
            if len(pts) < 3:
                raise ValueError("degenerate contour")
            poly = Polygon(pts)
            if name == "get_contour_area":
                return {"contour_area": poly.area}
            if name == "get_contour_perimeter":
                return {"contour_perimeter": poly.exterior.length}
            return {"contour_convex_hull": [list(c) for c in poly.convex_hull.exterior.coords[:-1]]}
        want = self.key(name, {k: self.canon(v) for k, v in bound.items()})
        for rec in self.records.get(name, []):
            if self.key(name, rec["args"]) == want:
                return self.expand(json.loads(json.dumps(rec["result"])))
        raise LookupError(f"no fixture for {name} {want}")

    def bindings(self):
        return {n: (lambda *a, _n=n, **k: self.call(_n, *a, **k)) for n in self.catalog}


# ---- agent loop emulation -----------------------------------------------------

def imports_allowed(code):
    try:
        tree = ast.parse(code)
    except SyntaxError:
        return True  # fails in exec anyway
    for node in ast.walk(tree):
        names = []
        if isinstance(node, ast.Import):
            names = [a.name for a in node.names]
        elif isinstance(node, ast.ImportFrom):
            names = [node.module or ""]
        if any(n.split(".")[0] not in ALLOWED for n in names):
            return False
    return True


def fill(text, subs):
    for k, v in subs.items():
        text = text.replace("{{" + k + "}}", v)
    return text


def run_recording(steps, mode, subs, tools, seed):
    if mode == "llm_only":
        return
    g = {"__builtins__": builtins}
    if tools is not None:
        g.update(tools.bindings())

    def final_answer(a):
        raise FinalAnswer(a)
    g["final_answer"] = final_answer
    random.seed(seed)
    for i, s in enumerate(steps[:MAX_STEPS]):
        code = fill(s["code"], subs)
        if imports_allowed(code):
            try:
                with contextlib.redirect_stdout(io.StringIO()):
                    exec(compile(code, f"step{i + 1}", "exec"), g)
            except FinalAnswer:
                return
            except Exception:
                pass
        if mode == "single_shot":
            return


# ---- scoring ------------------------------------------------------------------

def is_num(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def field_ok(pred, truth, tol):
    if isinstance(pred, (list, dict)) or pred is None:
        return 0
    if isinstance(tol, list):
        return int(isinstance(pred, str) and pred.strip().lower() in [t.strip().lower() for t in tol])
    if is_num(truth):
        if not is_num(pred) or not math.isfinite(pred):
            return 0
        slack = 1e-12 * max(1.0, abs(truth))
        if truth == 0:
            return int(abs(pred) <= tol + slack)
        return int(abs(pred - truth) <= tol * abs(truth) + slack)
    if isinstance(truth, str):
        return int(isinstance(pred, str) and pred.strip().lower() == truth.strip().lower())
    if isinstance(truth, bool):
        return int(pred is truth)
    return 0


def score_answer(path, truth, spec):
    cols = spec["columns_to_compare_and_tolerance"]
    try:
        pred = json.loads(path.read_text())
    except (OSError, ValueError):
        return 0.0, True
    if not isinstance(pred, list):
        return 0.0, True
    pred = [p for p in pred if isinstance(p, dict)]

    def rec_hits(p, t):
        return sum(field_ok(p.get(c), t.get(c), tol) if c in p else 0 for c, tol in cols.items())

    total = len(truth) * len(cols)
    idc = spec["id_column"]
    if idc:
        hits = 0
        for t in truth:
            cands = [rec_hits(p, t) for p in pred if idc in p and p[idc] == t[idc]
                     and type(p[idc]) is type(t[idc])]
            hits += max(cands, default=0)
    elif pred:
        cost = np.array([[len(cols) - rec_hits(p, t) for p in pred] for t in truth], dtype=float)
        r, c = linear_sum_assignment(cost)
        hits = sum(len(cols) - cost[i, j] for i, j in zip(r, c))
    else:
        hits = 0
    score = float(hits) / total
    return score, bool(score == 0)


def summarize(values):
    a = np.array(values, dtype=float)
    se = float(np.std(a, ddof=1) / math.sqrt(len(a))) if len(a) > 1 else 0.0
    return {"mean": float(a.mean()), "se": se, "per_trial": [float(x) for x in a]}


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=3)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    dataset = (BENCH / "dataset").resolve()
    qdir = BENCH / "questions"
    specs = {p.stem: json.loads(p.read_text()) for p in sorted(qdir.glob("*.json"))}
    truths = {q: json.loads((qdir / "ground_truth" / f"{q}.json").read_text()) for q in specs}
    out = {}
    for mode in ("llm_only", "single_shot", "iterative", "with_tools"):
        rec_dir = BENCH / "replay" / ("iterative" if mode == "single_shot" else mode)
        per_q = {q: {"scores": [], "failed": []} for q in specs}
        per_trial = []
        for trial in range(1, args.trials + 1):
            cat_scores = {c: [] for c in CATEGORIES}
            cat_fail = {c: [] for c in CATEGORIES}
            for qid, spec in specs.items():
                with tempfile.TemporaryDirectory() as tmp:
                    wd = Path(tmp).resolve()
                    subs = {"working_dir": str(wd), "dataset_root": str(dataset)}
                    if spec.get("slide_relative_path"):
                        subs["path_to_slide"] = str(dataset / spec["slide_relative_path"])
                    if spec.get("dataset_relative_path"):
                        subs["path_to_dataset"] = str(dataset / spec["dataset_relative_path"])
                    if spec.get("path_to_metadata"):
                        subs["path_to_metadata"] = str(dataset / spec["path_to_metadata"])
                    steps = json.loads((rec_dir / f"{qid}.json").read_text())
                    tools = Tools(dataset, wd) if mode == "with_tools" else None
                    run_recording(steps, mode, subs, tools, question_seed(args.seed, trial, qid))
                    s, failed = score_answer(wd / "answer.json", truths[qid], spec)
                per_q[qid]["scores"].append(s)
                per_q[qid]["failed"].append(failed)
                cat_scores[spec["category"]].append(s)
                cat_fail[spec["category"]].append(1.0 if failed else 0.0)
            per_trial.append((cat_scores, cat_fail))
        counts = {c: len(per_trial[0][0][c]) for c in CATEGORIES}
        n = sum(counts.values())
        cats = []
        for c in CATEGORIES:
            cats.append({"category": c, "n_questions": counts[c],
                         "score": summarize([np.mean(t[0][c]) for t in per_trial]),
                         "failure_rate": summarize([np.mean(t[1][c]) for t in per_trial])})
        overall_s = [sum(counts[c] * np.mean(t[0][c]) for c in CATEGORIES) / n for t in per_trial]
        overall_f = [sum(counts[c] * np.mean(t[1][c]) for c in CATEGORIES) / n for t in per_trial]
        out[mode] = {"questions": per_q, "categories": cats,
                     "overall_score": summarize(overall_s), "overall_failure_rate": summarize(overall_f)}
        print(f"{mode:12s} overall {out[mode]['overall_score']['mean']:.4f}", file=sys.stderr)
    (BENCH / "expected_scores.json").write_text(json.dumps(out, indent=2) + "\n")


if __name__ == "__main__":
    main()
