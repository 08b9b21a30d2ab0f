"""Command-line interface tests, driven through cli.main()."""

import numpy as np
import pytest
import yaml
from PIL import Image

from superseg import cli, raster
from superseg.raster import LabelMap, Palette, RasterImage, Segmentation


PAL = Palette(("ground", "building", "car"),
              ((191, 184, 153), (64, 77, 191), (204, 38, 38)))


def make_synth(tmp_path, size=64, seed=0):
    out = tmp_path / "exp"
    assert cli.main(["synth", "--out", str(out), "--seed", str(seed),
                     "--size", str(size)]) == 0
    return out


def write_dataset(root, tiles, palette=PAL):
    """Write a hand-built dataset: tiles maps name -> label array."""
    (root / "images").mkdir(parents=True, exist_ok=True)
    (root / "labels").mkdir(parents=True, exist_ok=True)
    raster.save_palette(palette, root / "palette.txt")
    for name, labels in tiles.items():
        labels = np.asarray(labels, dtype=np.int32)
        h, w = labels.shape
        raster.save_image(RasterImage(np.full((h, w, 3), 0.5)),
                          root / "images" / f"{name}.png")
        raster.save_labels(LabelMap(labels), palette,
                           root / "labels" / f"{name}.png")


def write_config(root, **overrides):
    cfg = {
        "dataset": {"images_dir": "images", "labels_dir": "labels",
                    "palette": "palette.txt"},
        "split": {"train": [], "val": [], "test": []},
        "algorithm": {"name": "slic", "params": {}},
        "output": "out",
    }
    cfg.update(overrides)
    path = root / "config.yaml"
    with open(path, "w") as f:
        yaml.safe_dump(cfg, f)
    return path


# ----------------------------------------------------------------- synth

def test_synth_writes_runnable_experiment(tmp_path):
    out = make_synth(tmp_path)
    for name in ("train0", "train1", "test0"):
        assert (out / "images" / f"{name}.png").exists()
        assert (out / "labels" / f"{name}.png").exists()
    assert (out / "palette.txt").exists()
    exp = cli.Experiment(out / "config.yaml")
    exp.validate()
    assert exp.tiles("train") == ["train0", "train1"]
    assert exp.tiles("test") == ["test0"]


def test_synth_deterministic(tmp_path):
    a = make_synth(tmp_path / "a", size=32, seed=5)
    b = make_synth(tmp_path / "b", size=32, seed=5)
    assert ((a / "images" / "test0.png").read_bytes()
            == (b / "images" / "test0.png").read_bytes())


# --------------------------------------------------------------- segment

def test_segment_writes_seg_and_manifest(tmp_path):
    out = make_synth(tmp_path, size=32)
    cfg = str(out / "config.yaml")
    assert cli.main(["segment", "--config", cfg, "--algo", "sw",
                     "--tiles", "test0"]) == 0
    seg = raster.load_segmentation(out / "out" / "segs" / "test0.png")
    assert seg.region_count == 9  # 32x32 tiled by the default 10px window
    manifest = (out / "out" / "segs" / "test0.manifest.json").read_text()
    assert '"algorithm": "sw"' in manifest and '"region_count": 9' in manifest


def test_segment_idempotent(tmp_path):
    out = make_synth(tmp_path, size=32)
    cfg = str(out / "config.yaml")
    path = out / "out" / "segs" / "test0.png"
    assert cli.main(["segment", "--config", cfg, "--algo", "sw",
                     "--tiles", "test0"]) == 0
    first = path.read_bytes()
    assert cli.main(["segment", "--config", cfg, "--algo", "sw",
                     "--tiles", "test0"]) == 0
    assert path.read_bytes() == first


def test_missing_image_errors(tmp_path, capsys):
    out = make_synth(tmp_path, size=32)
    cfg_path = out / "config.yaml"
    cfg = yaml.safe_load(cfg_path.read_text())
    cfg["split"]["test"] = ["ghost"]
    cfg_path.write_text(yaml.safe_dump(cfg))
    assert cli.main(["segment", "--config", str(cfg_path)]) == 1
    assert "ghost" in capsys.readouterr().err


# ---------------------------------------------------------------- eval-seg

def test_eval_seg_worked_fixture_row(tmp_path):
    write_dataset(tmp_path, {"t0": [[0, 0, 1, 1]] * 4})
    cfg = write_config(tmp_path, split={"train": [], "val": [], "test": ["t0"]})
    exp = cli.Experiment(cfg)
    exp.seg_path("t0").parent.mkdir(parents=True)
    raster.save_segmentation(
        Segmentation(np.array([[0, 0, 0, 1]] * 4, dtype=np.int32), 2),
        exp.seg_path("t0"))
    assert cli.main(["eval-seg", "--config", str(cfg)]) == 0
    csv = (tmp_path / "out" / "segmentation_metrics.csv").read_text()
    assert csv.splitlines() == [
        "algorithm,regions,ue_pct,br_pct,ap_pct,oracle_pct",
        "slic,2,50.00,100.00,83.33,75.00",
    ]


def test_eval_seg_pixel_weighted_aggregation(tmp_path):
    write_dataset(tmp_path, {
        "big": [[0, 0, 1, 1]] * 4,       # 16 labeled px, the worked fixture
        "small": [[0, 0], [0, 0]],       # 4 labeled px, perfect seg
    })
    cfg = write_config(tmp_path,
                       split={"train": [], "val": [], "test": ["big", "small"]})
    exp = cli.Experiment(cfg)
    exp.seg_path("big").parent.mkdir(parents=True)
    raster.save_segmentation(
        Segmentation(np.array([[0, 0, 0, 1]] * 4, dtype=np.int32), 2),
        exp.seg_path("big"))
    raster.save_segmentation(
        Segmentation(np.zeros((2, 2), dtype=np.int32), 1),
        exp.seg_path("small"))
    assert cli.main(["eval-seg", "--config", str(cfg)]) == 0
    row = (tmp_path / "out" / "segmentation_metrics.csv").read_text().splitlines()[1]
    # weights 16/20 and 4/20:
    #   UE = 0.8*0.5 = 0.4; BR = 1; AP = 0.8*(5/6) + 0.2; oracle = 0.8*0.75 + 0.2
    ue = 0.8 * 0.5 * 100
    ap = (0.8 * 5 / 6 + 0.2) * 100
    oracle = (0.8 * 0.75 + 0.2) * 100
    assert row == f"slic,2,{ue:.2f},100.00,{ap:.2f},{oracle:.2f}"


# ----------------------------------------------------------- full pipeline

def test_pipeline_small_scale(tmp_path):
    out = make_synth(tmp_path, size=64)
    cfg_path = out / "config.yaml"
    cfg = yaml.safe_load(cfg_path.read_text())
    cfg["algorithm"] = {"name": "sw", "params": {"window": 8}}
    cfg["patches"] = {"scales": [4, 8], "resize_to": 32}
    cfg_path.write_text(yaml.safe_dump(cfg))
    assert cli.main(["pipeline", "--config", str(cfg_path)]) == 0
    csv = (out / "out" / "classification_metrics.csv").read_text().splitlines()
    assert csv[0] == "algorithm,regions,acc_pct,f1_car,kappa"
    algo, regions, acc, f1, kappa = csv[1].split(",")
    assert algo == "sw" and float(regions) == 64
    assert 0.0 <= float(acc) <= 100.0
    assert f1 == "n/a" or 0.0 <= float(f1) <= 1.0
    assert -1.0 <= float(kappa) <= 1.0
    assert (out / "out" / "maps" / "test0.png").exists()
    assert (out / "out" / "model.txt").exists()


def test_pipeline_overlapping_split_errors(tmp_path, capsys):
    out = make_synth(tmp_path, size=32)
    cfg_path = out / "config.yaml"
    cfg = yaml.safe_load(cfg_path.read_text())
    cfg["split"]["test"] = ["train0"]
    cfg_path.write_text(yaml.safe_dump(cfg))
    assert cli.main(["pipeline", "--config", str(cfg_path)]) == 1
    assert "disjoint" in capsys.readouterr().err


def test_stage_tagged_error(tmp_path, capsys):
    out = make_synth(tmp_path, size=32)
    cfg = str(out / "config.yaml")
    # predict without a trained model fails in its own stage
    assert cli.main(["predict", "--config", cfg]) == 1
    assert capsys.readouterr().err.startswith("[predict]")


# ------------------------------------------------------------------ render

def test_render_label_map(tmp_path):
    write_dataset(tmp_path, {"t0": [[0, 1], [2, 0]]})
    cfg = write_config(tmp_path)
    out_png = tmp_path / "render.png"
    assert cli.main(["render", "--config", str(cfg),
                     "--input", str(tmp_path / "labels" / "t0.png"),
                     "--output", str(out_png)]) == 0
    rgb = np.asarray(Image.open(out_png))
    assert tuple(rgb[0, 0]) == PAL.colors[0]
    assert tuple(rgb[0, 1]) == PAL.colors[1]
    assert tuple(rgb[1, 0]) == PAL.colors[2]


def test_render_boundary_overlay(tmp_path):
    write_dataset(tmp_path, {"t0": np.zeros((4, 4), dtype=int)})
    cfg = write_config(tmp_path)
    quad = np.zeros((4, 4), dtype=np.int32)
    quad[:2, 2:] = 1
    quad[2:, :2] = 2
    quad[2:, 2:] = 3
    seg_path = tmp_path / "seg.png"
    raster.save_segmentation(Segmentation(quad, 4), seg_path)
    out_png = tmp_path / "overlay.png"
    assert cli.main(["render", "--config", str(cfg),
                     "--input", str(tmp_path / "labels" / "t0.png"),
                     "--output", str(out_png),
                     "--boundaries", str(seg_path)]) == 0
    rgb = np.asarray(Image.open(out_png))
    overlay = (rgb == (255, 255, 0)).all(axis=2)
    # every pixel touches a quadrant edge on a 4x4 grid -> full overlay cross
    from superseg import extract_boundaries
    assert np.array_equal(overlay, extract_boundaries(quad))


# ------------------------------------------------------------- overrides

def test_seed_and_out_overrides(tmp_path):
    out = make_synth(tmp_path, size=32)
    exp = cli.Experiment(out / "config.yaml", seed=42, out="elsewhere")
    assert exp.train_config().seed == 42
    assert exp.out == out / "elsewhere"


def test_algo_override(tmp_path):
    out = make_synth(tmp_path, size=32)
    exp = cli.Experiment(out / "config.yaml", algo="hswo")
    assert exp.algo_name == "hswo"


def test_unknown_algorithm_errors():
    img = RasterImage(np.zeros((4, 4, 3)))
    with pytest.raises(ValueError):
        cli.run_algorithm(img, "mrs", {})
