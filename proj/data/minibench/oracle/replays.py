#!/usr/bin/env python3
"""Authored replay recordings for the mini-benchmark, one list of
(thought, code) steps per question and mode. Writes replay/<mode>/<id>.json.

single_shot runs reuse the iterative recordings and stop after step 1, so
iterative step 1 is written to fail or be wrong on several questions.
"""
import json
from pathlib import Path

HERE = Path(__file__).resolve().parent

SAVE = '''
out = Path("{{working_dir}}") / "answer.json"
out.write_text(json.dumps(records))
'''


def step(thought, code):
    return {"thought": thought, "code": code.strip("\n")}


def answer(records_expr, final=True):
    body = f"import json\nfrom pathlib import Path\nrecords = {records_expr}" + SAVE
    if final:
        body += "final_answer(records)\n"
    return body


READ_CSV = '''
from pathlib import Path

def read_csv(path):
    lines = Path(path).read_text().strip().split("\\n")
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]
'''

LLM_ONLY = {
    "q01": step("Aperio scans are usually 40x at about 0.25 microns per pixel with 3 or 4 levels.",
                "magnification 40, mpp 0.25, levels 4"),
    "q02": step("Lung cohorts tend to be split evenly between adenocarcinoma and squamous cases.",
                "LUAD: 3, LUSC: 3"),
    "q03": step("Small folders like this usually hold a handful of slides.", "5"),
    "q04": step("Lung cancer patients are typically in their sixties.", "LUAD: 66, LUSC: 68"),
    "q05": step("A small ROI has a few dozen nuclei, mostly tumour.",
                "neoplastic 20, inflammatory 6, connective 4"),
    "q06": step("At 40x a tumour nucleus covers about 150 square pixels.", "150"),
    "q07": step("Inflammatory cells are usually around a tenth of all nuclei.", "0.1 for each ROI"),
    "q08": step("I cannot read the table, so I will describe how to find the answer.",
                "sort the table by score and keep the top three rows"),
    "q09": step("A typical biopsy gives a few hundred tiles at 20x.", "300"),
    "q10": step("Scores look like probabilities, so the mean is probably near 0.5.", "0.5 for each slide"),
    "q11": step("Without looking at the slides the best guess is an even split.", "LUAD: 3, LUSC: 3"),
    "q12": step("Resections are larger than biopsies, but I cannot tell which slide is which.", "S1"),
}

ITERATIVE = {
    "q01": [
        step("Each slide has a JSON sidecar with its properties; read it.",
             'import json\nfrom pathlib import Path\n'
             'props = json.loads(Path("{{path_to_slide}}").with_suffix(".json").read_text())\n'
             'records = [{"magnification": props["magnificaton"], "mpp": props["mpp"], "levels": props["levels"]}]'),
        step("The key was misspelled. Fix it and save.",
             answer('[{"magnification": props["magnification"], "mpp": props["mpp"], "levels": props["levels"]}]')),
    ],
    "q02": [
        step("Count the rows of the metadata table per diagnosis.",
             READ_CSV + 'rows = read_csv("{{path_to_metadata}}")\n'
             'counts = {}\nfor r in rows:\n    counts[r["diagnosis"]] = counts.get(r["diagnosis"], 0) + 1\n'
             + answer('[{"diagnosis": d, "n_slides": n} for d, n in sorted(counts.items())]')),
    ],
    "q03": [
        step("List the .svs files in the folder.",
             answer('[{"n_valid_slides": len(list(Path("{{path_to_dataset}}").rglob("*.svs")))}]',
                    final=False) + 'print(records)'),
        step("rglob descends into subfolders. Check what it found.",
             'print(sorted([p.relative_to(Path("{{path_to_dataset}}")).as_posix() '
             'for p in Path("{{path_to_dataset}}").rglob("*.svs")]))'),
        step("archive/S7.svs is nested and must not count. Use glob instead.",
             answer('[{"n_valid_slides": len(list(Path("{{path_to_dataset}}").glob("*.svs")))}]')),
    ],
    "q04": [
        step("Group ages by diagnosis and average them.",
             READ_CSV + 'rows = read_csv("{{path_to_metadata}}")\n'
             'ages = {}\nfor r in rows:\n    ages.setdefault(r["diagnosis"], []).append(int(r["patient_age"]))\n'
             + answer('[{"diagnosis": d, "mean_age": sum(v) / len(v)} for d, v in sorted(ages.items())]')),
    ],
    "q05": [
        step("Run the nuclei segmentation model on the ROI.",
             'result = segment_and_classify_nuclei_in_histology_roi_tool("{{path_to_slide}}")\nprint(result)'),
        step("There is no segmentation function here. I will count dark pixel clusters instead.",
             'lines = open("{{path_to_slide}}").read().split("\\n")\n'
             'values = [int(v) for line in lines[3:] for v in line.split()]\n'
             'dark = len([v for v in values if v < 120])\n'
             + answer('[{"neoplastic": dark // 3, "inflammatory": dark // 5, "connective": dark // 7}]')),
    ],
    "q06": [
        step("Segment nuclei first.",
             'result = segment_and_classify_nuclei_in_histology_roi_tool(image_path="{{path_to_slide}}")'),
        step("No model is available, so the area cannot be measured.",
             'final_answer("cannot segment nuclei without a model")'),
    ],
    "q07": [
        step("List ROI files.",
             'from pathlib import Path\nrois = sorted([p for p in Path("{{path_to_dataset}}").glob("*.ppm")])\n'
             'print([p.name for p in rois])'),
        step("Without a nucleus classifier I will report an even share for each ROI.",
             answer('[{"roi_id": p.stem, "inflammatory_fraction": 1 / 6} for p in rois]')),
    ],
    "q08": [
        step("Sort the patch table by score and keep three rows.",
             READ_CSV + 'rows = read_csv("{{path_to_metadata}}")\n'
             'rows = sorted(rows, key=lambda r: float(r["score"]))\n'
             + answer('[{"patch_x": int(r["patch_x"]), "patch_y": int(r["patch_y"]), '
                      '"score": float(r["score"])} for r in rows[:3]]', final=False)
             + 'print(records)'),
        step("Those are the lowest scores; the sort must be descending.",
             'rows = sorted(rows, key=lambda r: float(r["score"]), reverse=True)\n'
             + answer('[{"patch_x": int(r["patch_x"]), "patch_y": int(r["patch_y"]), '
                      '"score": float(r["score"])} for r in rows[:3]]')),
    ],
    "q09": [
        step("Estimate tiles from the slide size, assuming a tenth of the slide is tissue.",
             'import json\nfrom pathlib import Path\n'
             'props = json.loads(Path("{{path_to_slide}}").with_suffix(".json").read_text())\n'
             'w, h = props["dimensions"]\nscale = props["magnification"] / 20\n'
             + answer('[{"number_of_tiles": int(w * h / (scale * scale) / (256 * 256) / 10)}]')),
    ],
    "q10": [
        step("Read each patch table with the os module.",
             'import os\nfiles = os.listdir("{{path_to_dataset}}")'),
        step("os is not allowed; use pathlib.",
             READ_CSV + 'tables = sorted([p for p in Path("{{path_to_dataset}}").glob("*_patches.csv")])\n'
             'means = []\nfor t in tables:\n'
             '    scores = [float(r["score"]) for r in read_csv(t)]\n'
             '    means.append({"slide_id": t.stem.split("_")[0], "mean_score": sum(scores) / len(scores)})\n'
             + answer('means')),
    ],
    "q11": [
        step("No classifier is available. Use the diagnosis column of the metadata as a proxy.",
             READ_CSV + 'rows = read_csv("{{dataset_root}}/metadata.csv")\n'
             'present = [p.stem for p in Path("{{path_to_dataset}}").glob("*.svs")]\n'
             'counts = {}\nfor r in rows:\n    if r["slide_id"] in present:\n'
             '        counts[r["diagnosis"]] = counts.get(r["diagnosis"], 0) + 1\n'
             + answer('[{"predicted_label": k, "n_slides": v} for k, v in sorted(counts.items())]')),
    ],
    "q12": [
        step("Tissue area cannot be measured without segmentation. Pick one slide at random.",
             'import random\nfrom pathlib import Path\n'
             'slides = sorted([p.stem for p in Path("{{path_to_dataset}}").glob("*.svs")])\n'
             'pick = random.choice(slides)\n'
             + answer('[{"slide_id": pick}]')),
    ],
}

WITH_TOOLS = {
    "q01": [
        step("Read the slide properties with the WSI tool.",
             'props = retrieve_properties_from_wsi_tool(wsi_path="{{path_to_slide}}")\n'
             + answer('[{"magnification": props["magnification"], "mpp": props["mpp"], "levels": props["levels"]}]')),
    ],
    "q02": ITERATIVE["q02"],
    "q03": [
        step("Use the dataset helper; it does not search subfolders by default.",
             'res = dataset_of_wsi_get_valid_slide_paths_tool("{{path_to_dataset}}")\n'
             + answer('[{"n_valid_slides": res["number_of_valid_slides"]}]')),
    ],
    "q04": ITERATIVE["q04"],
    "q05": [
        step("Segment and classify nuclei, then read the class counts.",
             'res = segment_and_classify_nuclei_in_histology_roi_tool(image_path="{{path_to_slide}}")\n'
             'c = res["cell_type_counts"]\nprint(c)\n'
             + answer('[{"neoplastic": c["neoplastic"], "inflammatory": c["inflammatory"], '
                      '"connective": c["connective"]}]')),
    ],
    "q06": [
        step("Segment nuclei in the ROI.",
             'res = segment_and_classify_nuclei_in_histology_roi_tool(image_path="{{path_to_slide}}")\n'
             'neo = [n for n in res["nuclei"] if n["type"] == "neoplastic"]\nprint(len(neo))'),
        step("Measure each neoplastic contour and average.",
             'areas = [get_contour_area(contour=n["contour"])["contour_area"] for n in neo]\n'
             + answer('[{"mean_neoplastic_area": sum(areas) / len(areas)}]')),
    ],
    "q07": [
        step("Segment each ROI and compute the inflammatory share.",
             'from pathlib import Path\nrecords = []\n'
             'for p in sorted(Path("{{path_to_dataset}}").glob("*.ppm")):\n'
             '    res = segment_and_classify_nuclei_in_histology_roi_tool(image_path=str(p))\n'
             '    frac = res["cell_type_counts"]["inflammatory"] / res["number_of_nuclei"]\n'
             '    records.append({"roi_id": p.stem, "inflammatory_fraction": frac})\n'
             + answer('records')),
    ],
    "q08": [step(
        "Sort the table by score, highest first, and keep three rows.",
        READ_CSV + 'rows = sorted(read_csv("{{path_to_metadata}}"), key=lambda r: -float(r["score"]))\n'
        + answer('[{"patch_x": int(r["patch_x"]), "patch_y": int(r["patch_y"]), '
                 '"score": float(r["score"])} for r in rows[:3]]'))],
    "q09": [
        step("Check the slide first.",
             'print(retrieve_properties_from_wsi_tool("{{path_to_slide}}"))'),
        step("Tile the tissue with the default settings.",
             'tiles = extract_tissue_tiles_in_wsi_tool(wsi_path="{{path_to_slide}}")\n'
             + answer('[{"number_of_tiles": tiles["number_of_tiles"]}]')),
    ],
    "q10": [ITERATIVE["q10"][1]],
    "q11": [
        step("Find the slides, then classify each one.",
             'paths = dataset_of_wsi_get_valid_slide_paths_tool(wsi_source="{{path_to_dataset}}")["valid_slide_paths"]\n'
             'counts = {}\nfor p in paths:\n'
             '    lab = predict_wsi_label_tool(wsi_path=p, labels=["LUAD", "LUSC"])["predicted_label"]\n'
             '    counts[lab] = counts.get(lab, 0) + 1\nprint(counts)'),
        step("Save the counts.",
             answer('[{"predicted_label": k, "n_slides": v} for k, v in sorted(counts.items())]')),
    ],
    "q12": [
        step("Segment tissue on each slide and sum the region areas.",
             'paths = dataset_of_wsi_get_valid_slide_paths_tool(wsi_source="{{path_to_dataset}}")["valid_slide_paths"]\n'
             'areas = {}\nfor p in paths:\n'
             '    regions = extract_tissue_in_wsi_tool(wsi_path=p)["tissue_contours"]\n'
             '    areas[Path(p).stem] = sum([get_contour_area(r)["contour_area"] for r in regions])\n'),
        step("Path was not imported. Import it and retry.",
             'from pathlib import Path\nareas = {}\nfor p in paths:\n'
             '    regions = extract_tissue_in_wsi_tool(wsi_path=p)["tissue_contours"]\n'
             '    areas[Path(p).stem] = sum([get_contour_area(r)["contour_area"] for r in regions])\n'
             'best = max(areas, key=lambda k: areas[k])\nprint(best, areas[best])'),
        step("Save the slide with the largest area.", answer('[{"slide_id": best}]')),
    ],
}


def main():
    out = HERE.parent / "replay"
    for mode, table in (("llm_only", {k: [v] for k, v in LLM_ONLY.items()}),
                        ("iterative", ITERATIVE), ("with_tools", WITH_TOOLS)):
        d = out / mode
        d.mkdir(parents=True, exist_ok=True)
        for qid, steps in sorted(table.items()):
            (d / f"{qid}.json").write_text(json.dumps(steps, indent=2) + "\n")


if __name__ == "__main__":
    main()
