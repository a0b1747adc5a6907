"""Command-line interface: synthetic data generation, training, evaluation,
prediction, and the hybrid-vs-classical comparison experiments.

Metrics CSVs and checkpoints are deterministic for a fixed seed; wall-clock
timing is recorded only with ``--timing`` (which necessarily breaks
byte-for-byte reproducibility of the metrics file).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from . import data as dataio
from .checkpoint import load_checkpoint, save_checkpoint
from .estimators import ClassicalDrugResponseRegressor, HybridDrugResponseRegressor


def _fmt(value: float) -> str:
    return repr(float(value))


def _dataset_options(func):
    for option in reversed([
        click.option("--cell-lines", "cell_lines_path", required=True,
                     type=click.Path(exists=True, dir_okay=False),
                     help="cell_lines.csv (cell_line_id,b0,...,b734)"),
        click.option("--drugs", "drugs_path", required=True,
                     type=click.Path(exists=True, dir_okay=False),
                     help="drugs.csv (drug_id,smiles)"),
        click.option("--responses", "responses_path", required=True,
                     type=click.Path(exists=True, dir_okay=False),
                     help="responses.csv (drug_id,cell_line_id,ic50)"),
        click.option("--normalized", is_flag=True,
                     help="ic50 column already lies in (0,1); skip normalization"),
    ]):
        func = option(func)
    return func


def _train_options(func):
    for option in reversed([
        click.option("--lr", default=1.8e-3, show_default=True, type=float),
        click.option("--epochs", required=True, type=int),
        click.option("--seed", default=0, show_default=True, type=int),
        click.option("--train-size", default=5000, show_default=True, type=int),
        click.option("--test-size", default=1000, show_default=True, type=int),
        click.option("--batch-size", default=1, show_default=True, type=int),
        click.option("--entangler", default="ring", show_default=True,
                     type=click.Choice(["ring", "chain"])),
        click.option("--timing", is_flag=True,
                     help="record real wall_seconds in metrics (non-reproducible)"),
    ]):
        func = option(func)
    return func


def _load(cell_lines_path, drugs_path, responses_path, normalized):
    dataset = dataio.load_dataset(cell_lines_path, drugs_path, responses_path,
                                  normalized=normalized)
    click.echo(
        f"loaded {len(dataset.drugs)} drugs x {len(dataset.cell_lines)} cell lines, "
        f"{dataset.n_pairs} response pairs")
    return dataset


def _pairs_for(dataset, indices):
    xs, ys = [], []
    for i in indices:
        graph, bits, target = dataset.pair(int(i))
        xs.append((graph, bits))
        ys.append(target)
    return xs, np.array(ys)


def _echo_census(label, estimator):
    census = estimator.parameter_census()
    parts = [f"{k}={v}" for k, v in census.items() if k != "total"]
    click.echo(f"{label} trainable parameters: {', '.join(parts)}, total={census['total']}")


def _make_estimator(model, lr, epochs, seed, batch_size, entangler, timing):
    common = dict(lr=lr, epochs=epochs, seed=seed, batch_size=batch_size,
                  record_timings=timing)
    if model == "hybrid":
        return HybridDrugResponseRegressor(entangler=entangler, **common)
    return ClassicalDrugResponseRegressor(**common)


def _write_metrics(path, history):
    lines = ["epoch,train_mse,test_mse,wall_seconds"]
    for row in history:
        lines.append(f"{row['epoch']},{_fmt(row['train_mse'])},"
                     f"{_fmt(row['test_mse'])},{row['wall_seconds']:.3f}")
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


@click.group()
def main():
    """Hybrid quantum-classical drug response regression."""


@main.command("gen-synthetic")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--n-drugs", default=8, show_default=True, type=int)
@click.option("--n-cell-lines", default=4, show_default=True, type=int)
@click.option("--pairs", default=None, type=int,
              help="number of response pairs (default: all combinations)")
@click.option("--seed", default=7, show_default=True, type=int)
def gen_synthetic(out_dir, n_drugs, n_cell_lines, pairs, seed):
    """Write a synthetic dataset (three CSVs) with a planted smooth target."""
    paths = dataio.write_synthetic_csvs(out_dir, n_drugs, n_cell_lines, seed,
                                        n_pairs=pairs)
    for name, path in paths.items():
        click.echo(f"wrote {name}: {path}")


@main.command()
@_dataset_options
@_train_options
@click.option("--model", default="hybrid", show_default=True,
              type=click.Choice(["hybrid", "classical"]))
@click.option("--checkpoint", "checkpoint_path", default=None,
              type=click.Path(dir_okay=False))
@click.option("--metrics-out", default=None, type=click.Path(dir_okay=False))
@click.option("--split-out", default=None, type=click.Path(dir_okay=False),
              help="write the train/test index split to this file")
@click.option("--resume", is_flag=True,
              help="continue from --checkpoint up to --epochs total epochs")
def train(cell_lines_path, drugs_path, responses_path, normalized, lr, epochs,
          seed, train_size, test_size, batch_size, entangler, timing, model,
          checkpoint_path, metrics_out, split_out, resume):
    """Train one model and record per-epoch train/test MSE."""
    dataset = _load(cell_lines_path, drugs_path, responses_path, normalized)
    split = dataio.make_split(dataset.n_pairs, train_size, test_size, seed)
    if split_out:
        dataio.save_split(split, split_out)
    x_train, y_train = _pairs_for(dataset, split.train)
    x_test, y_test = _pairs_for(dataset, split.test)

    if resume:
        if not checkpoint_path or not Path(checkpoint_path).exists():
            raise click.UsageError("--resume needs an existing --checkpoint file")
        estimator = load_checkpoint(checkpoint_path)
        estimator.set_params(epochs=epochs, record_timings=timing)
        _echo_census(model, estimator)
        estimator.fit(x_train, y_train, eval_set=(x_test, y_test), resume=True)
    else:
        estimator = _make_estimator(model, lr, epochs, seed, batch_size,
                                    entangler, timing)
        estimator.fit(x_train, y_train, eval_set=(x_test, y_test))
        _echo_census(model, estimator)

    if metrics_out:
        _write_metrics(metrics_out, estimator.history_)
    if checkpoint_path:
        save_checkpoint(estimator, checkpoint_path)
    last = estimator.history_[-1] if estimator.history_ else None
    if last:
        click.echo(f"final train_mse={_fmt(last['train_mse'])} "
                   f"test_mse={_fmt(last['test_mse'])}")


@main.command()
@_dataset_options
@click.option("--checkpoint", "checkpoint_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--train-size", default=None, type=int,
              help="with --test-size and --seed, evaluate on that split's test part")
@click.option("--test-size", default=None, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
def evaluate(cell_lines_path, drugs_path, responses_path, normalized,
             checkpoint_path, train_size, test_size, seed):
    """Report MSE of a checkpointed model on a response table (or split)."""
    dataset = _load(cell_lines_path, drugs_path, responses_path, normalized)
    estimator = load_checkpoint(checkpoint_path)
    if train_size is not None and test_size is not None:
        split = dataio.make_split(dataset.n_pairs, train_size, test_size, seed)
        indices = split.test
    else:
        indices = np.arange(dataset.n_pairs)
    xs, ys = _pairs_for(dataset, indices)
    click.echo(f"mse={_fmt(estimator.score_mse(xs, ys))} over {len(xs)} pairs")


@main.command()
@click.option("--cell-lines", "cell_lines_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--drugs", "drugs_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--checkpoint", "checkpoint_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--drug-id", default=None, help="restrict to one drug")
@click.option("--cell-line-id", default=None, help="restrict to one cell line")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False))
@click.option("--dump-graph", is_flag=True,
              help="dump parsed drug graphs as JSON to stderr")
def predict(cell_lines_path, drugs_path, checkpoint_path, drug_id,
            cell_line_id, out_path, dump_graph):
    """Predict responses for drug/cell-line combinations."""
    from .smiles import parse_smiles

    estimator = load_checkpoint(checkpoint_path)
    drugs = {}
    for line_no, row in enumerate(
            Path(drugs_path).read_text(encoding="utf-8").splitlines(), start=1):
        if line_no == 1:
            continue
        did, smiles_string = row.split(",", 1)
        drugs[did] = parse_smiles(smiles_string)
    cells = {}
    for line_no, row in enumerate(
            Path(cell_lines_path).read_text(encoding="utf-8").splitlines(), start=1):
        if line_no == 1:
            continue
        fields = row.split(",")
        cells[fields[0]] = np.array([float(v) for v in fields[1:]])

    drug_ids = [drug_id] if drug_id else sorted(drugs)
    cell_ids = [cell_line_id] if cell_line_id else sorted(cells)
    for did in drug_ids:
        if did not in drugs:
            raise click.UsageError(f"unknown drug_id {did!r}")
    for cid in cell_ids:
        if cid not in cells:
            raise click.UsageError(f"unknown cell_line_id {cid!r}")

    if dump_graph:
        for did in drug_ids:
            print(json.dumps({"drug_id": did, **drugs[did].to_debug_dict()}),
                  file=sys.stderr)

    lines = ["drug_id,cell_line_id,prediction"]
    for did in drug_ids:
        for cid in cell_ids:
            pred = estimator.predict([(drugs[did], cells[cid])])[0]
            lines.append(f"{did},{cid},{_fmt(pred)}")
    output = "\n".join(lines) + "\n"
    if out_path:
        Path(out_path).write_bytes(output.encode("utf-8"))
    else:
        click.echo(output, nl=False)


def _run_compare(dataset, train_size, test_size, lr, epochs, seed, batch_size,
                 entangler, timing, echo_census=True):
    split = dataio.make_split(dataset.n_pairs, train_size, test_size, seed)
    x_train, y_train = _pairs_for(dataset, split.train)
    x_test, y_test = _pairs_for(dataset, split.test)
    results = {}
    for model in ("hybrid", "classical"):
        estimator = _make_estimator(model, lr, epochs, seed, batch_size,
                                    entangler, timing)
        estimator.fit(x_train, y_train, eval_set=(x_test, y_test))
        if echo_census:
            _echo_census(model, estimator)
        results[model] = estimator
    return results


@main.command()
@_dataset_options
@_train_options
@click.option("--metrics-out", default=None, type=click.Path(dir_okay=False))
def compare(cell_lines_path, drugs_path, responses_path, normalized, lr,
            epochs, seed, train_size, test_size, batch_size, entangler,
            timing, metrics_out):
    """Train the hybrid model and its classical counterpart on the same
    split/seed and report both loss curves plus the final-test-loss ratio."""
    dataset = _load(cell_lines_path, drugs_path, responses_path, normalized)
    results = _run_compare(dataset, train_size, test_size, lr, epochs, seed,
                           batch_size, entangler, timing)
    hybrid, classical = results["hybrid"], results["classical"]
    if metrics_out:
        lines = ["epoch,hybrid_train_mse,hybrid_test_mse,"
                 "classical_train_mse,classical_test_mse"]
        for h, c in zip(hybrid.history_, classical.history_):
            lines.append(f"{h['epoch']},{_fmt(h['train_mse'])},{_fmt(h['test_mse'])},"
                         f"{_fmt(c['train_mse'])},{_fmt(c['test_mse'])}")
        Path(metrics_out).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    h_final = hybrid.history_[-1]["test_mse"]
    c_final = classical.history_[-1]["test_mse"]
    click.echo(f"hybrid final test_mse={_fmt(h_final)}")
    click.echo(f"classical final test_mse={_fmt(c_final)}")
    click.echo(f"test-loss ratio (hybrid/classical)={_fmt(h_final / c_final)}")
    click.echo(f"improvement over classical={_fmt(100.0 * (1.0 - h_final / c_final))}%")


@main.command("size-sweep")
@_dataset_options
@_train_options
@click.option("--sizes", default="50:10,200:50,5000:1000", show_default=True,
              help="comma-separated train:test size pairs")
@click.option("--metrics-out", default=None, type=click.Path(dir_okay=False))
def size_sweep(cell_lines_path, drugs_path, responses_path, normalized, lr,
               epochs, seed, train_size, test_size, batch_size, entangler,
               timing, sizes, metrics_out):
    """Run the hybrid/classical comparison at several training-set sizes and
    report the per-size final-test-loss difference (classical - hybrid)."""
    del train_size, test_size  # sizes come from --sizes here
    dataset = _load(cell_lines_path, drugs_path, responses_path, normalized)
    pairs = []
    for token in sizes.split(","):
        try:
            tr, te = token.split(":")
            pairs.append((int(tr), int(te)))
        except ValueError:
            raise click.UsageError(f"bad --sizes entry {token!r}, expected train:test")
    lines = ["train_size,test_size,hybrid_test_mse,classical_test_mse,loss_difference"]
    for tr, te in pairs:
        results = _run_compare(dataset, tr, te, lr, epochs, seed, batch_size,
                               entangler, timing, echo_census=False)
        h_final = results["hybrid"].history_[-1]["test_mse"]
        c_final = results["classical"].history_[-1]["test_mse"]
        diff = c_final - h_final
        lines.append(f"{tr},{te},{_fmt(h_final)},{_fmt(c_final)},{_fmt(diff)}")
        click.echo(f"sizes {tr}/{te}: classical-hybrid loss difference = {_fmt(diff)}")
    if metrics_out:
        Path(metrics_out).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


if __name__ == "__main__":
    main()
