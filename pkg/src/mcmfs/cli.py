"""Command-line interface: select, train, predict, benchmark."""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import fields

import numpy as np

from . import filters, harness, mcm, svm
from .data import (DataError, Dataset, Standardizer, apply_standardizer,
                   fit_standardizer, load_dataset, stratified_kfold)

_EXIT_INPUT = 2
_EXIT_TRAINING = 3
_EXIT_INTERNAL = 1


def _write_atomic(path: str, text: str) -> None:
    """Write the finished document in one rename so failures leave no partial file."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".mcmfs-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _add_input_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="dataset file")
    p.add_argument("--format", choices=("csv", "sparse"), default="csv",
                   help="dataset file format (default csv)")
    p.add_argument("--label-column", default="label",
                   help="label column name for csv inputs (default 'label')")


def _load(args) -> Dataset:
    return load_dataset(args.input, fmt=args.format, label_column=args.label_column)


def _require_two_classes(d: Dataset) -> None:
    counts = d.class_counts()
    if counts[-1] == 0 or counts[1] == 0:
        raise DataError("single-class dataset")


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ValueError(f"cannot parse grid {text!r}") from None
    if not values:
        raise ValueError("grid must not be empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mcmfs",
        description="Sparse feature selection by a minimal-complexity hyperplane, "
                    "with ReliefF/FCBF baselines and an RBF-SVM evaluation harness.")
    p.add_argument("--show-config", action="store_true",
                   help="print every tunable default and exit")
    sub = p.add_subparsers(dest="command")

    ps = sub.add_parser("select", help="select features and write their indices")
    _add_input_args(ps)
    ps.add_argument("--method", choices=harness.METHODS, default="mcm")
    ps.add_argument("--out", required=True, help="output feature list")
    ps.add_argument("--C", type=float, default=1.0, help="slack trade-off (mcm)")
    ps.add_argument("--mcm-variant", choices=(mcm.VARIANT_PAPER, mcm.VARIANT_CLASSIC),
                    default=mcm.VARIANT_PAPER,
                    help="capacity rows with or without the slack term")
    ps.add_argument("--rel-tol", type=float, default=mcm.REL_TOL,
                    help="relative weight threshold (mcm)")
    ps.add_argument("--fraction", type=float, default=0.4,
                    help="cumulative score mass to keep (relieff)")
    ps.add_argument("--k-neighbors", type=int, default=10, help="neighbors per class (relieff)")
    ps.add_argument("--delta", type=float, default=0.0, help="relevance threshold (fcbf)")
    ps.add_argument("--bins", type=int, default=10, help="discretization bins (fcbf)")
    ps.add_argument("--seed", type=int, default=42)

    pt = sub.add_parser("train", help="train a model and write its document")
    _add_input_args(pt)
    pt.add_argument("--model-kind", choices=("mcm", "svm"), default="mcm")
    pt.add_argument("--out", required=True, help="output model document")
    pt.add_argument("--C", type=float, default=1.0, help="slack trade-off (mcm)")
    pt.add_argument("--mcm-variant", choices=(mcm.VARIANT_PAPER, mcm.VARIANT_CLASSIC),
                    default=mcm.VARIANT_PAPER)
    pt.add_argument("--hard-margin", action="store_true",
                    help="drop slacks entirely (mcm; fails on inseparable data)")
    pt.add_argument("--rel-tol", type=float, default=mcm.REL_TOL)
    pt.add_argument("--svm-C", type=float, default=1.0)
    pt.add_argument("--svm-gamma", type=float, default=0.5)
    pt.add_argument("--features", default=None,
                    help="feature list file (as written by select) restricting the svm")

    pp = sub.add_parser("predict", help="predict labels with a trained model document")
    _add_input_args(pp)
    pp.add_argument("--model", required=True, help="model document from train")
    pp.add_argument("--out", required=True, help="output label file")

    pb = sub.add_parser("benchmark", help="cross-validated method comparison")
    _add_input_args(pb)
    pb.add_argument("--methods", default="mcm,relieff,fcbf",
                    help="comma-separated subset of mcm,relieff,fcbf")
    pb.add_argument("--folds", type=int, default=5)
    pb.add_argument("--seed", type=int, default=42)
    pb.add_argument("--selection", choices=("per_fold", "global"), default="per_fold",
                    help="select per training fold, or once on the full dataset")
    pb.add_argument("--report", required=True, help="output report file")
    pb.add_argument("--table", action="store_true", help="print the comparison table")
    pb.add_argument("--timings", action="store_true",
                    help="include wall-clock timings in the report "
                         "(makes the file run-dependent)")
    pb.add_argument("--dataset-name", default=None, help="row label (default: file stem)")
    pb.add_argument("--C", type=float, default=1.0, help="slack trade-off (mcm)")
    pb.add_argument("--mcm-variant", choices=(mcm.VARIANT_PAPER, mcm.VARIANT_CLASSIC),
                    default=mcm.VARIANT_PAPER)
    pb.add_argument("--mcm-tune-C", action="store_true",
                    help="pick C by inner 3-fold accuracy instead of --C")
    pb.add_argument("--rel-tol", type=float, default=mcm.REL_TOL)
    pb.add_argument("--fraction", type=float, default=0.4)
    pb.add_argument("--k-neighbors", type=int, default=10)
    pb.add_argument("--delta", type=float, default=0.0)
    pb.add_argument("--bins", type=int, default=10)
    pb.add_argument("--svm-c-grid", default=None,
                    help="comma-separated C grid (default powers of two, -5..15 step 2)")
    pb.add_argument("--svm-gamma-grid", default=None,
                    help="comma-separated gamma grid (default powers of two, -15..3 step 2)")
    pb.add_argument("--inner-folds", type=int, default=5)
    return p


def _config_text() -> str:
    lines = ["mcmfs defaults"]
    for f in fields(harness.HarnessConfig):
        value = getattr(harness.HarnessConfig(), f.name)
        if isinstance(value, tuple):
            value = ",".join(f"{v:g}" for v in value)
        lines.append(f"  {f.name} = {value}")
    lines.append("  folds = 5")
    lines.append("  label_column = label")
    lines.append("  format = csv")
    lines.append("  sd_floor = 1e-08")
    lines.append("  selection_abs_floor = 1e-10")
    lines.append("  feature indices in files are 1-based")
    return "\n".join(lines) + "\n"


def _selection_params(args) -> str:
    if args.method == "mcm":
        return f"C={args.C:g} variant={args.mcm_variant} rel-tol={args.rel_tol:g}"
    if args.method == "relieff":
        return f"k-neighbors={args.k_neighbors} fraction={args.fraction:g} seed={args.seed}"
    return f"bins={args.bins} delta={args.delta:g}"


def _cmd_select(args) -> int:
    d = _load(args)
    _require_two_classes(d)
    std = fit_standardizer(d)
    ds = apply_standardizer(std, d)
    if args.method == "mcm":
        model = mcm.train_mcm(ds, C=args.C, variant=args.mcm_variant, rel_tol=args.rel_tol)
        selected = model.selected
    elif args.method == "relieff":
        ranking = filters.relieff_rank(ds, k_neighbors=args.k_neighbors, seed=args.seed)
        selected = filters.cumulative_fraction_select(ranking, args.fraction)
    else:
        dd = filters.discretize_equal_frequency(ds, bins=args.bins)
        selected = filters.fcbf_select(dd, delta=args.delta)
    lines = [
        f"# mcmfs select method={args.method} {_selection_params(args)}",
        "# columns: index(1-based) name",
    ]
    if not selected:
        lines.append("# empty selection: no feature passed the rule")
    lines += [f"{j + 1}\t{d.feature_names[j]}" for j in selected]
    _write_atomic(args.out, "\n".join(lines) + "\n")
    return 0


def _read_feature_file(path: str, n_features: int) -> tuple[int, ...]:
    selected = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tok = line.split()[0]
            try:
                j = int(tok)
            except ValueError:
                raise DataError(f"malformed feature index {tok!r} in {path}") from None
            if not 1 <= j <= n_features:
                raise DataError(f"feature index {j} out of range 1..{n_features}")
            selected.append(j - 1)
    if not selected:
        raise DataError(f"no feature indices found in {path}")
    return tuple(selected)


def _cmd_train(args) -> int:
    d = _load(args)
    _require_two_classes(d)
    std = fit_standardizer(d)
    ds = apply_standardizer(std, d)
    if args.model_kind == "mcm":
        model = mcm.train_mcm(ds, C=args.C, variant=args.mcm_variant,
                              hard_margin=args.hard_margin, rel_tol=args.rel_tol)
        text = mcm.mcm_model_to_text(model, std)
    else:
        subset = (tuple(range(d.n_features)) if args.features is None
                  else _read_feature_file(args.features, d.n_features))
        model = svm.train_svm(ds, subset, args.svm_C, args.svm_gamma)
        text = svm_model_to_text(model, std)
    _write_atomic(args.out, text)
    return 0


def svm_model_to_text(model: svm.SvmModel, standardizer: Standardizer | None = None) -> str:
    fmt = lambda v: format(float(v), ".17g")
    lines = [
        "svm-model v1",
        f"n {model.n_features_in}",
        f"C {fmt(model.C)}",
        f"kernel-gamma {fmt(model.kernel_gamma)}",
        f"bias {fmt(model.bias)}",
        "subset " + " ".join(str(j + 1) for j in model.feature_subset),
        f"support {model.coeffs.size}",
    ]
    for coef, row in zip(model.coeffs, model.support_samples):
        lines.append("sv " + fmt(coef) + " " + " ".join(fmt(v) for v in row))
    if standardizer is not None:
        lines.append("means " + " ".join(fmt(v) for v in standardizer.means))
        lines.append("sds " + " ".join(fmt(v) for v in standardizer.sds))
        lines.append(f"sd-floor {fmt(standardizer.sd_floor)}")
    lines.append("end")
    return "\n".join(lines) + "\n"


def svm_model_from_text(text: str) -> tuple[svm.SvmModel, Standardizer | None]:
    fields_ = {}
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line == "end":
            continue
        key, _, rest = line.partition(" ")
        if key == "sv":
            rows.append([float(v) for v in rest.split()])
        else:
            fields_[key] = rest
    if fields_.get("svm-model") != "v1":
        raise DataError("not an svm-model v1 document")
    try:
        subset = tuple(int(j) - 1 for j in fields_["subset"].split())
        coeffs = np.array([r[0] for r in rows])
        support = np.array([r[1:] for r in rows]).reshape(len(rows), len(subset))
        model = svm.SvmModel(
            support_samples=support,
            coeffs=coeffs,
            bias=float(fields_["bias"]),
            kernel_gamma=float(fields_["kernel-gamma"]),
            C=float(fields_["C"]),
            feature_subset=subset,
            n_features_in=int(fields_["n"]),
        )
        if int(fields_["support"]) != coeffs.size:
            raise DataError("support count does not match the sv lines")
    except (KeyError, ValueError) as exc:
        raise DataError(f"malformed svm-model document: {exc}") from None
    standardizer = None
    if "means" in fields_:
        standardizer = Standardizer(
            np.array([float(v) for v in fields_["means"].split()]),
            np.array([float(v) for v in fields_["sds"].split()]),
            float(fields_.get("sd-floor", "1e-8")),
        )
    return model, standardizer


def _cmd_predict(args) -> int:
    d = _load(args)
    with open(args.model, encoding="utf-8") as fh:
        text = fh.read()
    first = text.splitlines()[0].strip() if text.strip() else ""
    if first.startswith("mcm-model"):
        model, std = mcm.mcm_model_from_text(text)
        n = model.n_features
    elif first.startswith("svm-model"):
        model, std = svm_model_from_text(text)
        n = model.n_features_in
    else:
        raise DataError(f"unrecognized model document {args.model}")
    if d.n_features != n:
        raise DataError(f"dimension mismatch: model expects {n} features, "
                        f"dataset has {d.n_features}")
    ds = apply_standardizer(std, d) if std is not None else d
    if first.startswith("mcm-model"):
        labels = mcm.mcm_classify(model, ds.samples)
    else:
        labels = svm.svm_predict_batch(model, ds.samples)
    lines = [f"{sid}\t{int(v):+d}" for sid, v in zip(d.sample_ids, labels)]
    _write_atomic(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_benchmark(args) -> int:
    d = _load(args)
    _require_two_classes(d)
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for m in methods:
        if m not in harness.METHODS:
            raise ValueError(f"unknown method {m!r}")
    if not methods:
        raise ValueError("no methods given")
    cfg = harness.HarnessConfig(
        selection=args.selection,
        seed=args.seed,
        mcm_C=args.C,
        mcm_variant=args.mcm_variant,
        mcm_tune_C=args.mcm_tune_C,
        mcm_rel_tol=args.rel_tol,
        relieff_k=args.k_neighbors,
        fraction=args.fraction,
        fcbf_bins=args.bins,
        fcbf_delta=args.delta,
        svm_C_grid=(_parse_grid(args.svm_c_grid) if args.svm_c_grid
                    else svm.DEFAULT_C_GRID),
        svm_gamma_grid=(_parse_grid(args.svm_gamma_grid) if args.svm_gamma_grid
                        else svm.DEFAULT_GAMMA_GRID),
        inner_folds=args.inner_folds,
    )
    plan = stratified_kfold(d, args.folds, args.seed)
    name = args.dataset_name
    if name is None:
        name = os.path.splitext(os.path.basename(args.input))[0]
    report = harness.compare_methods(d, methods, plan, cfg, dataset_name=name)
    _write_atomic(args.report, harness.report_to_text(report, include_timings=args.timings))
    if args.table:
        sys.stdout.write(harness.format_table([report]))
    return 0


_COMMANDS = {
    "select": _cmd_select,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "benchmark": _cmd_benchmark,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.show_config:
        sys.stdout.write(_config_text())
        return 0
    if not args.command:
        parser.print_usage(sys.stderr)
        sys.stderr.write("option error: a command is required\n")
        return _EXIT_INPUT
    try:
        return _COMMANDS[args.command](args)
    except (DataError, OSError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return _EXIT_INPUT
    except (mcm.McmTrainingError, svm.SvmTrainingError) as exc:
        sys.stderr.write(f"training error: {exc}\n")
        return _EXIT_TRAINING
    except ValueError as exc:
        sys.stderr.write(f"option error: {exc}\n")
        return _EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"internal error: {exc}\n")
        return _EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
