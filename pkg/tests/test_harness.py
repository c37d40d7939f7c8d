"""Tests for dataset loading, the transfer experiment and result persistence."""

import csv
import json

import numpy as np
import pytest
from PIL import Image

from conftest import shapes_sample

from segtransfer.attacks.attack_config import AttackConfig
from segtransfer.attacks.gradient_attacks import fgsm
from segtransfer.config.experiment import DatasetConfig, load_experiment_config, parse_experiment_config
from segtransfer.exceptions import ConfigValidationError, DatasetError, ResultsSchemaError
from segtransfer.harness.dataset import encode_image, encode_labels, load_dataset
from segtransfer.harness.experiment import TransferService, derive_seed, evaluate_models, run_transfer_experiment
from segtransfer.harness.sweep import run_iteration_sweep
from segtransfer.metrics.confusion import ConfusionMatrix, accumulate_confusion, miou
from segtransfer.metrics.report import success_rate
from segtransfer.oracle.operations import predict
from segtransfer.oracle.registry import load_oracle
from segtransfer.oracle.toy_linear import ToyLinearSegmenter
from segtransfer.reporting.chart_generator import ChartGenerator
from segtransfer.reporting.export_service import ExportService, load_results, persist_results


class FailingOn(ToyLinearSegmenter):
    """Linear segmenter that refuses to differentiate one particular image."""

    def __init__(self, base, poisoned):
        super().__init__(base.weights, base.biases, identifier=base.identifier)
        self.poisoned = poisoned

    def weighted_loss_and_grad(self, image, labels, weights, normalizer):
        if np.array_equal(image, self.poisoned):
            raise RuntimeError("gradient unavailable")
        return super().weighted_loss_and_grad(image, labels, weights, normalizer)


def make_config(experiment_dict, dataset_dir, **overrides):
    data = dict(experiment_dict, **overrides)
    return parse_experiment_config(data, base_dir=dataset_dir)


def write_pair(images_dir, labels_dir, name, value=128, size=(4, 4)):
    images_dir.mkdir(parents=True, exist_ok=True)
    labels_dir.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.full(size + (3,), value, dtype=np.uint8)).save(images_dir / f"{name}.png")
    Image.fromarray(np.zeros(size, dtype=np.uint8)).save(labels_dir / f"{name}.png")


# Dataset
def test_empty_directories_are_fatal(tmp_path):
    (tmp_path / "images").mkdir()
    (tmp_path / "labels").mkdir()
    config = DatasetConfig(images_dir=tmp_path / "images", labels_dir=tmp_path / "labels", num_classes=2)
    with pytest.raises(DatasetError):
        load_dataset(config)


def test_limit_keeps_first_ids_in_sorted_order(tmp_path):
    for name in ("c", "a", "b"):
        write_pair(tmp_path / "images", tmp_path / "labels", name)
    config = DatasetConfig(images_dir=tmp_path / "images", labels_dir=tmp_path / "labels", num_classes=2, limit=2)
    assert [sample_id for _, _, sample_id in load_dataset(config)] == ["a", "b"]


def test_full_intensity_decodes_to_one(tmp_path):
    write_pair(tmp_path / "images", tmp_path / "labels", "white", value=255)
    config = DatasetConfig(images_dir=tmp_path / "images", labels_dir=tmp_path / "labels", num_classes=2)
    image, labels, _ = load_dataset(config)[0]
    assert np.all(image.data == 1.0)
    assert labels.data.dtype == np.int64


def test_items_without_partner_or_matching_size_are_skipped(tmp_path):
    write_pair(tmp_path / "images", tmp_path / "labels", "good")
    write_pair(tmp_path / "images", tmp_path / "labels", "small", size=(3, 3))
    Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(tmp_path / "labels" / "small.png")
    Image.fromarray(np.zeros((4, 4, 3), dtype=np.uint8)).save(tmp_path / "images" / "orphan.png")
    config = DatasetConfig(images_dir=tmp_path / "images", labels_dir=tmp_path / "labels", num_classes=2)
    assert [sample_id for _, _, sample_id in load_dataset(config)] == ["good"]


def test_fully_ignored_labels_are_skipped(tmp_path):
    write_pair(tmp_path / "images", tmp_path / "labels", "good")
    write_pair(tmp_path / "images", tmp_path / "labels", "blank")
    Image.fromarray(np.full((4, 4), 255, dtype=np.uint8)).save(tmp_path / "labels" / "blank.png")
    config = DatasetConfig(images_dir=tmp_path / "images", labels_dir=tmp_path / "labels", num_classes=2)
    assert [sample_id for _, _, sample_id in load_dataset(config)] == ["good"]


# Configuration
def test_config_file_resolves_relative_paths(config_file, dataset_dir):
    config = load_experiment_config(config_file)
    assert config.dataset.images_dir == dataset_dir / "images"
    assert config.output_dir == dataset_dir / "out"
    assert config.attacks[0].config.alpha == pytest.approx(0.0125)


def test_config_validation_lists_every_issue(experiment_dict, dataset_dir):
    experiment_dict["attacks"].append({"name": "cw"})
    experiment_dict["targets"].append("missing")
    experiment_dict["models"].append(dict(experiment_dict["models"][0]))
    with pytest.raises(ConfigValidationError) as excinfo:
        make_config(experiment_dict, dataset_dir)
    issues = " ".join(excinfo.value.issues)
    assert "unknown attack 'cw'" in issues
    assert "'missing' is not a registered model id" in issues
    assert "duplicate ids" in issues


def test_config_schema_errors_are_reported(experiment_dict, dataset_dir):
    experiment_dict["attacks"][0]["config"] = {"epsilon": 0.01, "alpha": 0.5}
    experiment_dict["workers"] = 0
    with pytest.raises(ConfigValidationError) as excinfo:
        make_config(experiment_dict, dataset_dir)
    assert len(excinfo.value.issues) >= 2


def test_duplicate_attack_names_need_labels(experiment_dict, dataset_dir):
    experiment_dict["attacks"].append({"name": "pgd", "config": {"epsilon": 0.01}})
    with pytest.raises(ConfigValidationError):
        make_config(experiment_dict, dataset_dir)
    experiment_dict["attacks"][-1]["label"] = "pgd-small"
    config = make_config(experiment_dict, dataset_dir)
    assert [attack.key for attack in config.attacks] == ["fgsm", "pgd", "pgd-small"]


# Transfer experiment
def test_derive_seed_depends_only_on_seed_and_id():
    assert derive_seed(7, "img_00") == derive_seed(7, "img_00")
    assert derive_seed(7, "img_00") != derive_seed(7, "img_01")
    assert derive_seed(7, "img_00") != derive_seed(8, "img_00")


def test_single_model_single_attack_matches_direct_computation(experiment_dict, dataset_dir):
    config = make_config(
        experiment_dict, dataset_dir,
        sources=["toy-a"], targets=["toy-a"], attacks=[{"name": "fgsm", "config": {"epsilon": 0.05}}],
    )
    matrix = run_transfer_experiment(config)
    assert len(matrix.cells) == 1
    assert len(matrix.image_quality) == 1

    oracle = load_oracle(config.model_entry("toy-a"))
    clean_cm, adv_cm = ConfusionMatrix(3), ConfusionMatrix(3)
    for image, labels, _ in load_dataset(config.dataset):
        adv = fgsm(oracle, image, labels, AttackConfig(epsilon=0.05)).adv_image
        clean_cm = accumulate_confusion(clean_cm, predict(oracle, image), labels)
        adv_cm = accumulate_confusion(adv_cm, predict(oracle, adv), labels)
    expected = success_rate(miou(clean_cm)[0], miou(adv_cm)[0])
    assert matrix.cells[0].sr == pytest.approx(expected, abs=1e-12)


def test_matrix_cardinality(experiment_dict, dataset_dir):
    experiment_dict["attacks"].append({"name": "ni", "config": {"epsilon": 0.05, "iterations": 3}})
    matrix = run_transfer_experiment(make_config(experiment_dict, dataset_dir))
    assert len(matrix.cells) == 12
    assert len(matrix.image_quality) == 6
    keys = {(cell.source_id, cell.attack_name, cell.target_id) for cell in matrix.cells}
    assert len(keys) == 12


def test_zero_budget_attack_has_zero_success(experiment_dict, dataset_dir):
    attacks = [
        {"name": name, "config": {"epsilon": 0.0}} for name in ("fgsm", "pgd", "dag", "ensemble")
    ]
    matrix = run_transfer_experiment(make_config(experiment_dict, dataset_dir, attacks=attacks))
    for cell in matrix.cells:
        assert cell.sr == pytest.approx(0.0, abs=1e-9)
    for row in matrix.image_quality:
        assert row.psnr == 100.0


def test_success_rates_rederivable_from_stored_confusion(experiment_dict, dataset_dir):
    matrix = run_transfer_experiment(make_config(experiment_dict, dataset_dir))
    for cell in matrix.cells:
        clean = miou(ConfusionMatrix(3, np.array(matrix.clean_confusion[cell.target_id])))[0]
        adv = miou(ConfusionMatrix(3, np.array(cell.confusion)))[0]
        assert clean == pytest.approx(matrix.clean_miou[cell.target_id], abs=1e-12)
        assert cell.sr == pytest.approx(1 - adv / clean, abs=1e-9)
        assert cell.clean_miou == matrix.clean_miou[cell.target_id]


def test_failed_images_excluded_for_every_target(experiment_dict, dataset_dir):
    config = make_config(experiment_dict, dataset_dir, attacks=[{"name": "fgsm", "config": {"epsilon": 0.05}}])
    samples = load_dataset(config.dataset)
    poisoned = samples[1][0].data
    oracles = {
        "toy-a": FailingOn(load_oracle(config.model_entry("toy-a")), poisoned),
        "toy-b": load_oracle(config.model_entry("toy-b")),
    }
    matrix = run_transfer_experiment(config, oracles=oracles)
    quality = matrix.quality("toy-a", "fgsm")
    assert quality.failed_ids == [samples[1][2]]
    assert quality.images == 3
    assert all(cell.images == 3 for cell in matrix.cells if cell.source_id == "toy-a")
    assert all(cell.images == 4 for cell in matrix.cells if cell.source_id == "toy-b")


def test_failed_images_share_the_clean_reference_of_their_row(experiment_dict, dataset_dir):
    # toy-a mislabels every pixel of img_00, so its clean score depends on which images count
    Image.fromarray(np.full((16, 16), 2, dtype=np.uint8)).save(dataset_dir / "labels" / "img_00.png")
    config = make_config(experiment_dict, dataset_dir, attacks=[{"name": "fgsm", "config": {"epsilon": 0.0}}])
    samples = load_dataset(config.dataset)
    oracles = {
        "toy-a": FailingOn(load_oracle(config.model_entry("toy-a")), samples[1][0].data),
        "toy-b": load_oracle(config.model_entry("toy-b")),
    }
    matrix = run_transfer_experiment(config, oracles=oracles)
    assert matrix.quality("toy-a", "fgsm").failed_ids == ["img_01"]
    for cell in matrix.cells:
        assert cell.sr == pytest.approx(0.0, abs=1e-12)
        assert cell.sr == pytest.approx(success_rate(cell.clean_miou, cell.miou), abs=1e-12)
    degraded = matrix.cell("toy-a", "fgsm", "toy-a")
    assert degraded.clean_miou < matrix.clean_miou["toy-a"]
    assert matrix.cell("toy-b", "fgsm", "toy-a").clean_miou == matrix.clean_miou["toy-a"]


def test_saved_adversarial_images_and_quantization_recorded(experiment_dict, dataset_dir):
    config = make_config(experiment_dict, dataset_dir, save_adversarial=True, quantize_adversarial=True)
    matrix = run_transfer_experiment(config)
    assert matrix.conventions["quantize_adversarial"] is True
    saved = sorted((config.output_dir / "adversarial" / "toy-a" / "pgd").glob("*.png"))
    assert [path.stem for path in saved] == ["img_00", "img_01", "img_02", "img_03"]


def test_evaluate_models_reports_clean_scores(experiment_dict, dataset_dir):
    scores = evaluate_models(make_config(experiment_dict, dataset_dir))
    assert set(scores) == {"toy-a", "toy-b"}
    score, per_class = scores["toy-a"]
    assert score == pytest.approx(1.0)
    assert len(per_class) == 3


def test_clean_reference_is_shared_by_all_cells(experiment_dict, dataset_dir):
    service = TransferService(make_config(experiment_dict, dataset_dir))
    _, scores = service.clean_reference()
    matrix = service.run()
    assert matrix.clean_miou == scores


# Persistence
def test_results_are_byte_identical_across_runs_and_workers(experiment_dict, dataset_dir, tmp_path):
    first = make_config(experiment_dict, dataset_dir, output_dir=str(tmp_path / "run1"))
    second = make_config(experiment_dict, dataset_dir, output_dir=str(tmp_path / "run2"), workers=3)
    persist_results(run_transfer_experiment(first), first.output_dir)
    persist_results(run_transfer_experiment(second), second.output_dir)
    assert (tmp_path / "run1" / "results.csv").read_bytes() == (tmp_path / "run2" / "results.csv").read_bytes()


def test_csv_rows_and_success_rate_column(experiment_dict, dataset_dir, tmp_path):
    matrix = run_transfer_experiment(make_config(experiment_dict, dataset_dir))
    paths = persist_results(matrix, tmp_path / "results")
    with open(paths["results.csv"], newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == len(matrix.cells) == 8
    assert list(rows[0]) == ["source", "attack", "psnr", "ssim", "target", "miou", "sr"]
    for row in rows:
        clean = matrix.clean_miou[row["target"]]
        assert float(row["sr"]) == pytest.approx(1 - float(row["miou"]) / clean, abs=1e-9)


def test_results_json_round_trip(experiment_dict, dataset_dir, tmp_path):
    matrix = run_transfer_experiment(make_config(experiment_dict, dataset_dir))
    paths = persist_results(matrix, tmp_path / "results")
    document = json.loads(paths["results.json"].read_text())
    assert document["schema_version"] == 1
    assert "tool_version" in document and "conventions" in document
    assert load_results(paths["results.json"]) == matrix


def test_unsupported_schema_version_rejected(tmp_path):
    path = tmp_path / "results.json"
    path.write_text(json.dumps({"schema_version": 99, "cells": []}))
    with pytest.raises(ResultsSchemaError):
        load_results(path)


def test_failed_write_leaves_no_partial_files(experiment_dict, dataset_dir, tmp_path):
    matrix = run_transfer_experiment(make_config(experiment_dict, dataset_dir))
    directory = tmp_path / "results"
    (directory / "results.csv").mkdir(parents=True)
    with pytest.raises(OSError):
        persist_results(matrix, directory)
    assert sorted(path.name for path in directory.iterdir()) == ["results.csv"]


def test_iteration_sweep_rows(experiment_dict, dataset_dir, tmp_path):
    config = make_config(experiment_dict, dataset_dir)
    rows = run_iteration_sweep(config, [1, 3])
    assert len(rows) == 2 * 2 * 2 * 2
    fgsm_rows = [row for row in rows if row.attack_name == "fgsm" and row.target_id == "toy-b" and row.source_id == "toy-a"]
    assert fgsm_rows[0].one_minus_miou == fgsm_rows[1].one_minus_miou
    path = ExportService(tmp_path / "sweep").export_sweep(rows)
    lines = path.read_text().splitlines()
    assert lines[0] == "source,attack,iterations,target,ssim,one_minus_miou"
    assert len(lines) == len(rows) + 1


def test_images_below_ssim_window_leave_ssim_empty(experiment_dict, tmp_path):
    small = tmp_path / "small"
    for i in range(3):
        image, labels = shapes_sample(i, size=8)
        encode_image(image, small / "images" / f"img_{i:02d}.png")
        encode_labels(labels, small / "labels" / f"img_{i:02d}.png")
    config = make_config(experiment_dict, small, output_dir=str(small / "out"))

    matrix = run_transfer_experiment(config)
    assert all(row.ssim is None for row in matrix.image_quality)
    assert all(row.psnr > 0 for row in matrix.image_quality)

    paths = persist_results(matrix, config.output_dir)
    with open(paths["results.csv"], newline="") as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 8
    assert all(row["ssim"] == "" and row["psnr"] != "" for row in rows)
    assert load_results(paths["results.json"]) == matrix
    assert len(ChartGenerator(tmp_path / "charts").generate_all(matrix)) >= 3

    sweep = run_iteration_sweep(config, [1])
    assert all(row.ssim is None for row in sweep)
    lines = ExportService(tmp_path / "sweep").export_sweep(sweep).read_text().splitlines()
    assert all(line.split(",")[4] == "" for line in lines[1:])
