#!/usr/bin/env python3
"""Builds the synthetic mini-benchmark: dataset tree, tool fixtures, questions
and ground truth. Ground truth is computed here from the raw files with plain
Python (and shapely for polygon areas); nothing in this script calls into the
C++ code.

    python3 build_minibench.py [--out DIR]
"""
import argparse
import csv
import io
import json
import math
import random
import shutil
from pathlib import Path

from shapely.geometry import Polygon

HERE = Path(__file__).resolve().parent
CLASSES = ["no_label", "neoplastic", "inflammatory", "connective", "dead", "epithelial"]


def dump(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def blob(rng, cx, cy, r, k=8):
    """Star-shaped polygon around (cx, cy); simple by construction."""
    pts = []
    for i in range(k):
        a = 2 * math.pi * i / k
        rr = r * rng.uniform(0.75, 1.25)
        pts.append([round(cx + rr * math.cos(a), 2), round(cy + rr * math.sin(a), 2)])
    return pts


def build_dataset(root, rng):
    slides = root / "slides"
    slides.mkdir(parents=True)
    (slides / "archive").mkdir()
    props = {}
    for i in range(1, 7):
        mag = 40 if i in (1, 3, 4) else 20
        mpp = round((0.25 if mag == 40 else 0.5) + rng.uniform(-0.01, 0.01), 4)
        w, h = rng.randrange(20000, 90000, 8), rng.randrange(15000, 60000, 8)
        p = {"magnification": mag, "mpp": mpp, "levels": rng.choice([3, 4]),
             "dimensions": [w, h], "vendor": "aperio"}
        props[f"S{i}"] = p
        (slides / f"S{i}.svs").write_text("synthetic slide placeholder\n")
        dump(slides / f"S{i}.json", p)
        # small grey thumbnail so the tree looks like a slide folder
        (slides / f"S{i}_thumb.pgm").write_text(
            "P2\n4 4\n255\n" + "\n".join(" ".join(str(rng.randrange(150, 250)) for _ in range(4))
                                         for _ in range(4)) + "\n")
    (slides / "archive" / "S7.svs").write_text("synthetic slide placeholder\n")
    (slides / "README.txt").write_text("scanner export, one file per slide\n")

    diagnoses = {"S1": "LUAD", "S2": "LUSC", "S3": "LUAD", "S4": "LUAD", "S5": "LUSC",
                 "S6": "LUAD", "S7": "LUSC"}
    rows = [{"slide_id": s, "diagnosis": d, "patient_age": rng.randrange(45, 81),
             "site": rng.choice(["A", "B"])} for s, d in diagnoses.items()]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["slide_id", "diagnosis", "patient_age", "site"], lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    (root / "metadata.csv").write_text(buf.getvalue())

    feats = root / "features"
    feats.mkdir()
    for s in ("S1", "S2", "S3"):
        scores = rng.sample(range(50, 10000), 10)
        lines = ["patch_x,patch_y,score"]
        for k, sc in enumerate(scores):
            lines.append(f"{256 * (k % 5)},{256 * (k // 5)},{sc / 10000:.4f}")
        (feats / f"{s}_patches.csv").write_text("\n".join(lines) + "\n")

    rois = root / "rois"
    rois.mkdir()
    for r in ("R1", "R2", "R3"):
        pix = [" ".join(str(rng.randrange(80, 256)) for _ in range(3 * 8)) for _ in range(8)]
        (rois / f"{r}.ppm").write_text("P3\n8 8\n255\n" + "\n".join(pix) + "\n")
    return props


def build_fixtures(root, props, rng):
    fx = {}

    def add(tool, args, result):
        fx.setdefault(tool, []).append({"args": args, "result": result})

    for s, p in props.items():
        add("retrieve_properties_from_wsi_tool", {"wsi_path": f"{{dataset}}/slides/{s}.svs"},
            {k: p[k] for k in ("magnification", "mpp", "levels", "dimensions", "vendor")})

    add("dataset_of_wsi_get_valid_slide_paths_tool", {"wsi_source": "{dataset}/slides"},
        {"valid_slide_paths": [f"{{dataset}}/slides/S{i}.svs" for i in range(1, 7)],
         "number_of_valid_slides": 6})

    nuclei = {}
    for r in ("R1", "R2", "R3"):
        n = rng.randrange(9, 15)
        items = []
        for _ in range(n):
            cls = rng.choice(CLASSES[1:4] * 3 + CLASSES)
            cx, cy = rng.uniform(20, 236), rng.uniform(20, 236)
            items.append({"contour": blob(rng, cx, cy, rng.uniform(4, 9)), "type": cls,
                          "centroid": [round(cx, 2), round(cy, 2)]})
        counts = {c: sum(1 for it in items if it["type"] == c) for c in CLASSES}
        nuclei[r] = items
        add("segment_and_classify_nuclei_in_histology_roi_tool", {"image_path": f"{{dataset}}/rois/{r}.ppm"},
            {"nuclei": items, "cell_type_counts": counts, "number_of_nuclei": n})
        add("read_histology_roi_tool", {"image_path": f"{{dataset}}/rois/{r}.ppm"},
            {"width": 256, "height": 256, "channels": 3, "mpp": 0.25})

    tissue = {}
    for s in props:
        regions = []
        for _ in range(rng.randrange(1, 4)):
            regions.append(blob(rng, rng.uniform(100, 900), rng.uniform(100, 700), rng.uniform(40, 160), k=12))
        tissue[s] = regions
        add("extract_tissue_in_wsi_tool", {"wsi_path": f"{{dataset}}/slides/{s}.svs"},
            {"tissue_contours": regions, "number_of_tissue_regions": len(regions), "thumbnail_mpp": 16.0})

    tiles = [[256 * (k % 9), 256 * (k // 9)] for k in range(rng.randrange(30, 60))]
    add("extract_tissue_tiles_in_wsi_tool", {"wsi_path": "{dataset}/slides/S2.svs"},
        {"tiles": tiles, "number_of_tiles": len(tiles)})

    predicted = {"S1": "LUAD", "S2": "LUSC", "S3": "LUSC", "S4": "LUAD", "S5": "LUSC", "S6": "LUAD"}
    for s, lab in predicted.items():
        p = round(rng.uniform(0.6, 0.95), 3)
        probs = {"LUAD": p, "LUSC": round(1 - p, 3)} if lab == "LUAD" else {"LUAD": round(1 - p, 3), "LUSC": p}
        add("predict_wsi_label_tool", {"wsi_path": f"{{dataset}}/slides/{s}.svs", "labels": ["LUAD", "LUSC"]},
            {"predicted_label": lab, "probabilities": probs})

    add("trident_docs_retriever", {"query": "tissue segmentation"},
        {"passages": ["Tissue segmentation returns one contour per connected tissue region."]})

    seg = "{working_dir}/seg"
    add("dataset_of_wsi_tissue_segmentation_tool", {"job_dir": seg, "wsi_source": "{dataset}/slides"},
        {"dir_with_geojson_contours": f"{seg}/contours_geojson",
         "dir_with_tissue_contours_jpg": f"{seg}/contours",
         "dir_with_slide_thumbnails": f"{seg}/thumbnails",
         "tissue_segmentation_log_file": f"{seg}/_logs_segmentation.txt",
         "tissue_segmentation_config_file": f"{seg}/_config_segmentation.json",
         "number_of_processed_segmentations": 6,
         "operation_log": "segmented 6 slides, 0 skipped"})

    for tool, recs in fx.items():
        dump(root / "fixtures" / tool / "records.json", recs)
    return nuclei, tissue, predicted, len(tiles)


def question(qid, category, data_type, text, output, columns, id_column=None, slide=None, dataset=None,
             metadata=None, extra="Use the tools and files available to you."):
    q = {"id": qid, "category": category, "data_type": data_type}
    if slide:
        q["slide_relative_path"] = slide
    if dataset:
        q["dataset_relative_path"] = dataset
    q["path_to_metadata"] = metadata
    q.update({
        "question": text,
        "additional_instructions": extra,
        "output_instructions": output + " Save the records as a JSON list to {working_dir}/answer.json.",
        "id_column": id_column,
        "columns_to_compare_and_tolerance": columns,
        "rationale": "Synthetic question for the offline test suite.",
        "is_pathologist_verified": False,
        "is_biomedical_scientist_verified": False,
    })
    return q


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def build_questions(root, suite, props, nuclei, tissue, predicted, n_tiles):
    qs, truth = [], {}
    meta = read_csv(root / "metadata.csv")

    qs.append(question("q01", "DataQA", "single_wsi",
                       "Report the objective magnification, microns per pixel and number of pyramid levels "
                       "of the slide at {path_to_slide}.",
                       "One record with keys magnification, mpp, levels.",
                       {"magnification": 0.01, "mpp": 0.01, "levels": 0.01}, slide="slides/S1.svs"))
    p = props["S1"]
    truth["q01"] = [{"magnification": p["magnification"], "mpp": p["mpp"], "levels": p["levels"]}]

    qs.append(question("q02", "DataQA", "summary_of_multiple_wsi",
                       "How many slides of each diagnosis are listed in the metadata table at {path_to_metadata}?",
                       "One record per diagnosis with keys diagnosis and n_slides.",
                       {"n_slides": 0.001}, id_column="diagnosis", dataset=".", metadata="metadata.csv"))
    by_dx = {}
    for r in meta:
        by_dx[r["diagnosis"]] = by_dx.get(r["diagnosis"], 0) + 1
    truth["q02"] = [{"diagnosis": d, "n_slides": n} for d, n in sorted(by_dx.items())]

    qs.append(question("q03", "DataQA", "multiple_wsi",
                       "How many whole slide images with the .svs extension sit directly in {path_to_dataset}? "
                       "Do not count files in subfolders.",
                       "One record with key n_valid_slides.",
                       {"n_valid_slides": 0.001}, dataset="slides"))
    truth["q03"] = [{"n_valid_slides": len([f for f in (root / "slides").iterdir() if f.suffix == ".svs"])}]

    qs.append(question("q04", "DataQA", "summary_of_multiple_wsi",
                       "What is the mean patient age per diagnosis in {path_to_metadata}?",
                       "One record per diagnosis with keys diagnosis and mean_age.",
                       {"mean_age": 0.01}, id_column="diagnosis", dataset=".", metadata="metadata.csv"))
    ages = {}
    for r in meta:
        ages.setdefault(r["diagnosis"], []).append(int(r["patient_age"]))
    truth["q04"] = [{"diagnosis": d, "mean_age": sum(v) / len(v)} for d, v in sorted(ages.items())]

    qs.append(question("q05", "CellularQA", "single_wsi",
                       "Count the neoplastic, inflammatory and connective nuclei in the ROI at {path_to_slide}.",
                       "One record with keys neoplastic, inflammatory, connective.",
                       {"neoplastic": 0.001, "inflammatory": 0.001, "connective": 0.001}, slide="rois/R1.ppm"))
    truth["q05"] = [{c: sum(1 for n in nuclei["R1"] if n["type"] == c)
                     for c in ("neoplastic", "inflammatory", "connective")}]

    qs.append(question("q06", "CellularQA", "single_wsi",
                       "What is the mean area, in square pixels, of the neoplastic nuclei in the ROI at "
                       "{path_to_slide}?",
                       "One record with key mean_neoplastic_area.",
                       {"mean_neoplastic_area": 0.02}, slide="rois/R2.ppm"))
    areas = [Polygon(n["contour"]).area for n in nuclei["R2"] if n["type"] == "neoplastic"]
    truth["q06"] = [{"mean_neoplastic_area": sum(areas) / len(areas)}]

    qs.append(question("q07", "CellularQA", "multiple_wsi",
                       "For each ROI image in {path_to_dataset}, what fraction of the detected nuclei are "
                       "inflammatory?",
                       "One record per ROI with keys roi_id (file stem) and inflammatory_fraction.",
                       {"inflammatory_fraction": 0.02}, id_column="roi_id", dataset="rois"))
    truth["q07"] = [{"roi_id": r, "inflammatory_fraction":
                     sum(1 for n in nuclei[r] if n["type"] == "inflammatory") / len(nuclei[r])}
                    for r in ("R1", "R2", "R3")]

    qs.append(question("q08", "PatchQA", "single_wsi",
                       "Using the patch feature table at {path_to_metadata}, list the three highest scoring "
                       "patches.",
                       "Three records with keys patch_x, patch_y, score.",
                       {"patch_x": 0.001, "patch_y": 0.001, "score": 0.001},
                       slide="slides/S1.svs", metadata="features/S1_patches.csv"))
    rows = read_csv(root / "features" / "S1_patches.csv")
    rows.sort(key=lambda r: -float(r["score"]))
    truth["q08"] = [{"patch_x": int(r["patch_x"]), "patch_y": int(r["patch_y"]), "score": float(r["score"])}
                    for r in rows[:3]]

    qs.append(question("q09", "PatchQA", "single_wsi",
                       "How many tissue tiles does the slide at {path_to_slide} yield with the default tiling "
                       "settings?",
                       "One record with key number_of_tiles.",
                       {"number_of_tiles": 0.001}, slide="slides/S2.svs"))
    truth["q09"] = [{"number_of_tiles": n_tiles}]

    qs.append(question("q10", "PatchQA", "summary_of_multiple_wsi",
                       "Compute the mean patch score of every slide that has a patch table in {path_to_dataset}.",
                       "One record per slide with keys slide_id and mean_score.",
                       {"mean_score": 0.001}, id_column="slide_id", dataset="features"))
    truth["q10"] = []
    for s in ("S1", "S2", "S3"):
        sc = [float(r["score"]) for r in read_csv(root / "features" / f"{s}_patches.csv")]
        truth["q10"].append({"slide_id": s, "mean_score": sum(sc) / len(sc)})

    qs.append(question("q11", "SlideQA", "multiple_wsi",
                       "Classify every slide directly in {path_to_dataset} as LUAD or LUSC and count the slides "
                       "per predicted label.",
                       "One record per label with keys predicted_label and n_slides.",
                       {"n_slides": 0.001}, id_column="predicted_label", dataset="slides"))
    counts = {}
    for lab in predicted.values():
        counts[lab] = counts.get(lab, 0) + 1
    truth["q11"] = [{"predicted_label": k, "n_slides": v} for k, v in sorted(counts.items())]

    def total_area(s):
        return sum(Polygon(c).area for c in tissue[s])
    ranked = sorted(tissue, key=total_area, reverse=True)
    assert total_area(ranked[0]) > 1.05 * total_area(ranked[1]), "tissue areas too close"
    qs.append(question("q12", "SlideQA", "multiple_wsi",
                       "Which slide in {path_to_dataset} has the largest total tissue area?",
                       "One record with key slide_id.",
                       {"slide_id": [ranked[0]]}, dataset="slides"))
    truth["q12"] = [{"slide_id": ranked[0]}]

    for q in qs:
        dump(suite / f"{q['id']}.json", q)
        dump(suite / "ground_truth" / f"{q['id']}.json", truth[q["id"]])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=HERE.parent)
    args = ap.parse_args()
    out = args.out
    for sub in ("dataset", "questions"):
        if (out / sub).exists():
            shutil.rmtree(out / sub)
    rng = random.Random(20240611)
    props = build_dataset(out / "dataset", rng)
    nuclei, tissue, predicted, n_tiles = build_fixtures(out / "dataset", props, rng)
    build_questions(out / "dataset", out / "questions", props, nuclei, tissue, predicted, n_tiles)


if __name__ == "__main__":
    main()
