"""Command-line pipeline runner.

Subcommands: segment, eval-seg, features, train, predict, eval-classif,
pipeline, render, synth. All experiment choices (tile splits, algorithm
parameters, descriptor, training hyperparameters) live in a YAML config;
--algo, --out and --seed override the config from the command line.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from . import claseval, classify, features, raster, segeval, superpixels, synth
from .raster import UNLABELED


class StageError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class Experiment:
    """Config file wrapper resolving paths and building parameter objects."""

    def __init__(self, config_path, algo=None, out=None, seed=None):
        self.path = Path(config_path)
        with open(self.path) as f:
            self.cfg = yaml.safe_load(f)
        self.root = self.path.parent
        if algo:
            self.cfg.setdefault("algorithm", {})["name"] = algo
        if out:
            self.cfg["output"] = out
        if seed is not None:
            self.cfg.setdefault("train", {})["seed"] = seed
        self.out = Path(self.cfg.get("output", "out"))
        if not self.out.is_absolute():
            self.out = self.root / self.out

    def _resolve(self, p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else self.root / p

    def validate(self):
        split = self.cfg.get("split", {})
        lists = [split.get(k, []) or [] for k in ("train", "val", "test")]
        tiles = [t for lst in lists for t in lst]
        if len(set(tiles)) != len(tiles):
            raise ValueError("train/val/test tile lists must be disjoint")
        for tile in tiles:
            for path in (self.image_path(tile), self.labels_path(tile)):
                if not path.exists():
                    raise ValueError(f"missing dataset file: {path}")
        if not self._resolve(self.cfg["dataset"]["palette"]).exists():
            raise ValueError("missing palette file")

    def tiles(self, which: str) -> list[str]:
        return list(self.cfg.get("split", {}).get(which, []) or [])

    def image_path(self, tile) -> Path:
        return self._resolve(self.cfg["dataset"]["images_dir"]) / f"{tile}.png"

    def labels_path(self, tile) -> Path:
        return self._resolve(self.cfg["dataset"]["labels_dir"]) / f"{tile}.png"

    def palette(self) -> raster.Palette:
        return raster.load_palette(self._resolve(self.cfg["dataset"]["palette"]))

    @property
    def algo_name(self) -> str:
        return self.cfg.get("algorithm", {}).get("name", "slic")

    @property
    def algo_params(self) -> dict:
        return dict(self.cfg.get("algorithm", {}).get("params", {}) or {})

    def patch_spec(self) -> features.PatchSpec:
        p = self.cfg.get("patches", {}) or {}
        return features.PatchSpec(
            scales=tuple(p.get("scales", (32, 64, 128))),
            resize_to=int(p.get("resize_to", 228)))

    def descriptor(self) -> dict:
        return dict(self.cfg.get("descriptor", {"kind": "builtin"}) or {"kind": "builtin"})

    def train_config(self) -> classify.TrainConfig:
        t = self.cfg.get("train", {}) or {}
        return classify.TrainConfig(
            lam=float(t.get("lambda", 1e-4)),
            epochs=int(t.get("epochs", 20)),
            eta0=float(t.get("eta0", 1.0)),
            seed=int(t.get("seed", 0)))

    @property
    def br_tol(self) -> int:
        return int((self.cfg.get("eval", {}) or {}).get("br_tol", 3))

    def f1_class(self, palette: raster.Palette) -> int:
        name = (self.cfg.get("eval", {}) or {}).get("f1_class")
        if name is None:
            name = "car" if "car" in palette.names else palette.names[-1]
        return palette.class_id(name)

    def seg_path(self, tile) -> Path:
        return self.out / "segs" / f"{tile}.png"

    def features_path(self, tile) -> Path:
        return self.out / "features" / f"{tile}.txt"

    def map_path(self, tile) -> Path:
        return self.out / "maps" / f"{tile}.png"

    def model_path(self) -> Path:
        return self.out / "model.txt"


def run_algorithm(img: raster.RasterImage, name: str, params: dict) -> raster.Segmentation:
    if name == "slic":
        return superpixels.slic(img, superpixels.SlicParams(
            k=int(params.get("k", 400)),
            compactness=float(params.get("compactness", 10.0)),
            max_iters=int(params.get("max_iters", 10)),
            min_region_fraction=float(params.get("min_region_fraction", 0.25))))
    if name == "lsc":
        return superpixels.lsc(img, superpixels.LscParams(
            k=int(params.get("k", 400)),
            ratio=float(params.get("ratio", 0.5)),
            max_iters=int(params.get("max_iters", 10))))
    if name == "quickshift":
        return superpixels.quickshift(img, superpixels.QuickshiftParams(
            kernel_size=float(params.get("kernel_size", 2.0)),
            max_dist=float(params.get("max_dist", 8.0)),
            color_ratio=float(params.get("color_ratio", 1.0))))
    if name == "sw":
        window = int(params.get("window", 10))
        return superpixels.sliding_window(
            img.height, img.width, window, int(params.get("stride", window)))
    if name == "hswo":
        return superpixels.hswo_merge(img, superpixels.MergeParams(
            target_regions=int(params.get("target_regions", 400))))
    raise ValueError(f"unknown algorithm {name!r}")


def _segment_tile(exp: Experiment, tile: str) -> raster.Segmentation:
    img = raster.load_image(exp.image_path(tile))
    start = time.perf_counter()
    seg = run_algorithm(img, exp.algo_name, exp.algo_params)
    elapsed = time.perf_counter() - start
    exp.seg_path(tile).parent.mkdir(parents=True, exist_ok=True)
    raster.save_segmentation(seg, exp.seg_path(tile))
    manifest = {
        "tile": tile,
        "algorithm": exp.algo_name,
        "params": exp.algo_params,
        "region_count": seg.region_count,
        "wall_time_s": round(elapsed, 4),
    }
    (exp.out / "segs" / f"{tile}.manifest.json").write_text(
        json.dumps(manifest, sort_keys=True) + "\n")
    print(f"{tile}: {exp.algo_name} -> {seg.region_count} regions "
          f"({elapsed:.2f}s)")
    return seg


def _all_tiles(exp: Experiment) -> list[str]:
    return exp.tiles("train") + exp.tiles("val") + exp.tiles("test")


def cmd_segment(exp: Experiment, tiles=None):
    exp.validate()
    for tile in tiles or _all_tiles(exp):
        if not exp.image_path(tile).exists():
            raise FileNotFoundError(f"missing image: {exp.image_path(tile)}")
        _segment_tile(exp, tile)


def cmd_eval_seg(exp: Experiment, tiles=None):
    exp.validate()
    palette = exp.palette()
    tiles = tiles or (exp.tiles("test") or _all_tiles(exp))
    reports, weights = [], []
    for tile in tiles:
        seg = raster.load_segmentation(exp.seg_path(tile))
        gt = raster.load_labels(exp.labels_path(tile), palette,
                                unknown_to_unlabeled=True)
        reports.append(segeval.evaluate(seg, gt, exp.br_tol))
        weights.append(int((gt.labels != UNLABELED).sum()))
    w = np.array(weights, dtype=np.float64)
    w /= w.sum()
    agg = segeval.SegMetricsReport(
        region_count=round(float(np.mean([r.region_count for r in reports]))),
        ue=float(sum(wi * r.ue for wi, r in zip(w, reports))),
        br=float(sum(wi * r.br for wi, r in zip(w, reports))),
        ap=float(sum(wi * r.ap for wi, r in zip(w, reports))),
        oracle=float(sum(wi * r.oracle for wi, r in zip(w, reports))))
    csv = segeval.CSV_HEADER + "\n" + agg.csv_row(exp.algo_name) + "\n"
    exp.out.mkdir(parents=True, exist_ok=True)
    (exp.out / "segmentation_metrics.csv").write_text(csv)
    print(csv, end="")


def _tile_samples(exp: Experiment, tile: str, seg: raster.Segmentation) -> features.FeatureSet:
    desc = exp.descriptor()
    if desc.get("kind", "builtin") == "external":
        paths = desc.get("paths", {}) or {}
        if tile not in paths:
            raise ValueError(f"no external feature file configured for tile {tile!r}")
        ext = features.load_external_features(exp._resolve(paths[tile]))
        return features.build_samples(raster.load_image(exp.image_path(tile)),
                                      seg, exp.patch_spec(), external=ext)
    img = raster.load_image(exp.image_path(tile))
    return features.build_samples(img, seg, exp.patch_spec())


def _load_or_build_samples(exp: Experiment, tile: str,
                           seg: raster.Segmentation) -> features.FeatureSet:
    """Reuse the feature file written by the features stage when present."""
    path = exp.features_path(tile)
    if path.exists():
        ext = features.load_external_features(path)
        return features.build_samples(raster.load_image(exp.image_path(tile)),
                                      seg, exp.patch_spec(), external=ext)
    return _tile_samples(exp, tile, seg)


def cmd_features(exp: Experiment, tiles=None):
    exp.validate()
    for tile in tiles or _all_tiles(exp):
        seg = raster.load_segmentation(exp.seg_path(tile))
        fs = _tile_samples(exp, tile, seg)
        exp.features_path(tile).parent.mkdir(parents=True, exist_ok=True)
        features.save_features(fs, exp.features_path(tile))
        print(f"{tile}: {fs.region_count} samples of dim {fs.dim}")


def cmd_train(exp: Experiment):
    exp.validate()
    palette = exp.palette()
    xs, ys = [], []
    for tile in exp.tiles("train"):
        seg = raster.load_segmentation(exp.seg_path(tile))
        gt = raster.load_labels(exp.labels_path(tile), palette,
                                unknown_to_unlabeled=True)
        fs = _load_or_build_samples(exp, tile, seg)
        xs.append(fs.vectors)
        ys.append(raster.majority_label(seg, gt))
    samples = features.FeatureSet(np.concatenate(xs))
    labels = np.concatenate(ys)
    model = classify.train_svm(samples, labels, exp.train_config())
    exp.out.mkdir(parents=True, exist_ok=True)
    classify.save_model(model, exp.model_path())
    acc = classify.training_accuracy(model, samples, labels)
    print(f"trained on {int((labels != UNLABELED).sum())} samples, "
          f"training accuracy {acc:.4f}")


def cmd_predict(exp: Experiment, tiles=None):
    exp.validate()
    palette = exp.palette()
    model = classify.load_model(exp.model_path())
    for tile in tiles or exp.tiles("test"):
        seg = raster.load_segmentation(exp.seg_path(tile))
        fs = _load_or_build_samples(exp, tile, seg)
        pred = classify.predict_batch(model, fs)
        sem = classify.build_semantic_map(seg, pred)
        exp.map_path(tile).parent.mkdir(parents=True, exist_ok=True)
        raster.save_labels(sem, palette, exp.map_path(tile))
        print(f"{tile}: semantic map -> {exp.map_path(tile)}")


def cmd_eval_classif(exp: Experiment, tiles=None):
    exp.validate()
    palette = exp.palette()
    tiles = tiles or exp.tiles("test")
    cm = claseval.ConfusionMatrix(np.zeros((len(palette), len(palette)), dtype=np.int64))
    region_counts = []
    for tile in tiles:
        pred = raster.load_labels(exp.map_path(tile), palette)
        gt = raster.load_labels(exp.labels_path(tile), palette,
                                unknown_to_unlabeled=True)
        cm = cm + claseval.confusion(pred, gt, len(palette))
        region_counts.append(raster.load_segmentation(exp.seg_path(tile)).region_count)
    row = claseval.csv_row(exp.algo_name, float(np.mean(region_counts)), cm,
                           exp.f1_class(palette))
    csv = claseval.CSV_HEADER + "\n" + row + "\n"
    exp.out.mkdir(parents=True, exist_ok=True)
    (exp.out / "classification_metrics.csv").write_text(csv)
    print(csv, end="")


def cmd_pipeline(exp: Experiment):
    exp.validate()
    if not exp.tiles("train") or not exp.tiles("test"):
        raise ValueError("pipeline needs non-empty train and test tile lists")
    stages = [("segment", lambda: cmd_segment(exp)),
              ("features", lambda: cmd_features(exp)),
              ("train", lambda: cmd_train(exp)),
              ("predict", lambda: cmd_predict(exp)),
              ("eval", lambda: cmd_eval_classif(exp))]
    for stage, fn in stages:
        try:
            fn()
        except Exception as exc:
            raise StageError(stage, str(exc)) from exc


def cmd_render(exp: Experiment, input_path, out_path, boundaries=None,
               boundary_color=(255, 255, 0)):
    palette = exp.palette()
    input_path = Path(input_path)
    if input_path.suffix == ".txt" or Path(str(input_path) + ".json").exists():
        seg = raster.load_segmentation(input_path)
        if seg.region_count > len(palette):
            raise ValueError("palette does not cover all region ids")
        labels = raster.LabelMap(seg.regions)
    else:
        labels = raster.load_labels(input_path, palette)
    lut = np.array(palette.colors + ((0, 0, 0),), dtype=np.uint8)
    idx = np.where(labels.labels == UNLABELED, len(palette), labels.labels)
    rgb = lut[idx]
    if boundaries is not None:
        seg = raster.load_segmentation(boundaries)
        mask = raster.extract_boundaries(seg)
        rgb[mask] = boundary_color
    from PIL import Image
    Image.fromarray(rgb, mode="RGB").save(out_path)
    print(f"rendered -> {out_path}")


def cmd_synth(out_dir, seed=0, size=256, shapes=12, noise=0.03):
    """Write a self-contained synthetic experiment: train/test tiles,
    labels, palette, and a ready-to-run config."""
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    (out / "labels").mkdir(parents=True, exist_ok=True)
    palette = synth.DEFAULT_PALETTE
    raster.save_palette(palette, out / "palette.txt")
    for tile, tile_seed in (("train0", seed), ("train1", seed + 1),
                            ("test0", seed + 2)):
        img, labels = synth.generate_scene(size=size, num_shapes=shapes,
                                           noise_sigma=noise, seed=tile_seed)
        raster.save_image(img, out / "images" / f"{tile}.png")
        raster.save_labels(labels, palette, out / "labels" / f"{tile}.png")
    config = {
        "dataset": {"images_dir": "images", "labels_dir": "labels",
                    "palette": "palette.txt"},
        "split": {"train": ["train0", "train1"], "val": [], "test": ["test0"]},
        "algorithm": {"name": "slic",
                      "params": {"k": 400, "compactness": 15.0}},
        # patch scales proportional to the tile size: the standard
        # 32/64/128 scales target multi-thousand-pixel tiles
        "patches": {"scales": [max(2, size // 32), max(4, size // 16),
                               max(8, size // 8)], "resize_to": 228},
        "descriptor": {"kind": "builtin"},
        "train": {"lambda": 1.0e-4, "epochs": 20, "eta0": 1.0, "seed": seed},
        "eval": {"br_tol": 3, "f1_class": "car"},
        "output": "out",
    }
    with open(out / "config.yaml", "w") as f:
        yaml.safe_dump(config, f, sort_keys=False)
    print(f"synthetic experiment written to {out}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superseg",
        description="Superpixel segmentation and region classification pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kwargs):
        p = sub.add_parser(name, **kwargs)
        if name != "synth":
            p.add_argument("--config", required=True, help="YAML experiment config")
            p.add_argument("--algo",
                           choices=["slic", "lsc", "quickshift", "sw", "hswo"])
            p.add_argument("--out", help="output directory override")
            p.add_argument("--seed", type=int, help="training seed override")
        return p

    for name, hlp in (("segment", "segment tiles"),
                      ("eval-seg", "segmentation metrics CSV"),
                      ("features", "build per-region feature files"),
                      ("train", "train the linear SVM"),
                      ("predict", "predict semantic maps for test tiles"),
                      ("eval-classif", "classification metrics CSV"),
                      ("pipeline", "full train/predict/eval pipeline")):
        p = add(name, help=hlp)
        if name in ("segment", "eval-seg", "features", "predict", "eval-classif"):
            p.add_argument("--tiles", nargs="*", help="restrict to these tiles")

    p = add("render", help="render a label map or segmentation to a color image")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--boundaries", help="segmentation file to overlay boundaries from")

    p = sub.add_parser("synth", help="generate a synthetic experiment")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--shapes", type=int, default=12)
    p.add_argument("--noise", type=float, default=0.03)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    stage = args.command
    try:
        if args.command == "synth":
            cmd_synth(args.out, args.seed, args.size, args.shapes, args.noise)
            return 0
        exp = Experiment(args.config, algo=args.algo, out=args.out, seed=args.seed)
        if args.command == "segment":
            cmd_segment(exp, args.tiles)
        elif args.command == "eval-seg":
            cmd_eval_seg(exp, args.tiles)
        elif args.command == "features":
            cmd_features(exp, args.tiles)
        elif args.command == "train":
            cmd_train(exp)
        elif args.command == "predict":
            cmd_predict(exp, args.tiles)
        elif args.command == "eval-classif":
            cmd_eval_classif(exp, args.tiles)
        elif args.command == "pipeline":
            cmd_pipeline(exp)
        elif args.command == "render":
            cmd_render(exp, args.input, args.output, args.boundaries)
        return 0
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"[{stage}] {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
