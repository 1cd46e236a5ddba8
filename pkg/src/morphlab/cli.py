"""Command-line surface.

Exit codes: 0 success, 2 input/validation error, 3 backend failure,
4 internal error. Every command is deterministic given its flags and input
file contents, and every report embeds the input digests it was computed
from.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__, fileio, report as report_mod
from .backend import BackendFailure, resolve_backend, run_morph_pipeline
from .core import MetricsReport, Provenance
from .errors import MorphlabError
from .pairs import DEFAULT_TOP_K, partition_by_metadata, select_top_pairs, SPLIT_KEYS
from .vulnerability import vulnerability_table

TOOL = f"morphlab {__version__}"

EXIT_VALIDATION = 2
EXIT_BACKEND = 3
EXIT_INTERNAL = 4


def _fail(code: int, message: str):
    click.echo(f"morphlab: error: {message}", err=True)
    sys.exit(code)


def _guarded(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except BackendFailure as e:
        _fail(EXIT_BACKEND, str(e))
    except MorphlabError as e:
        _fail(EXIT_VALIDATION, str(e))
    except Exception as e:  # pragma: no cover - defensive
        _fail(EXIT_INTERNAL, f"internal error: {e!r}")


def _provenance(inputs: list[str], parameters: list[tuple[str, str]]) -> Provenance:
    return Provenance(
        inputs=tuple((p, fileio.sha256_file(p)) for p in inputs),
        tool=TOOL,
        parameters=tuple(parameters),
    )


@click.group()
@click.version_option(version=__version__, prog_name="morphlab")
def main():
    """Face-morphing generation and evaluation toolkit."""


@main.command("pairs")
@click.option("--embeddings", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--meta", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--k", default=DEFAULT_TOP_K, show_default=True, type=int,
              help="pairs to keep per gender/expression split")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_pairs(embeddings, meta, k, out):
    """Select the most similar cross-subject pairs within each split."""

    def run():
        embs = fileio.load_embeddings(embeddings)
        from .core import validate_embedding_set

        validate_embedding_set(embs)
        metas = fileio.load_meta(meta)
        splits = partition_by_metadata(embs, metas)
        selected = []
        for key in SPLIT_KEYS:
            if splits[key]:
                selected.extend(select_top_pairs(splits[key], k))
        fileio.save_pairs(out, selected)
        click.echo(f"wrote {len(selected)} pairs to {out}")

    _guarded(run)


@main.command("morph")
@click.option("--pairs", "pairs_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--images", required=True, type=click.Path(exists=True, file_okay=False),
              help="directory holding the source images named by their ids")
@click.option("--backend", "backend_name", default="toy", show_default=True)
@click.option("--lambda", "lam", default=None, type=float,
              help="override the interpolation weight of every pair")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--job-dir", required=True, type=click.Path(file_okay=False))
def cmd_morph(pairs_file, images, backend_name, lam, seed, job_dir):
    """Encode, compose and decode one morph per selected pair."""

    def run():
        pairs = fileio.load_pairs(pairs_file)
        backend = resolve_backend(backend_name)
        results = run_morph_pipeline(
            pairs, backend, images, job_dir, seed=seed, lam_override=lam
        )
        click.echo(f"wrote {len(results)} morphs under {job_dir} (manifest: morphs.tsv)")

    _guarded(run)


@main.command("vuln")
@click.option("--mated", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--nonmated", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--fmr", "fmr_targets", multiple=True, type=float, default=(0.01, 0.001),
              show_default=True)
@click.option("--fmmpmr", "include_fmmpmr", is_flag=True,
              help="also compute the attempt-level FMMPMR")
@click.option("--model", default="default", show_default=True)
@click.option("--morph-type", default="default", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_vuln(mated, nonmated, fmr_targets, include_fmmpmr, model, morph_type, out):
    """Compute MMPMR (and optionally FMMPMR) at FMR-anchored thresholds."""

    def run():
        mated_set = fileio.load_mated(mated)
        nonmated_set = fileio.load_nonmated(nonmated)
        prov = _provenance(
            [mated, nonmated],
            [("fmr_targets", ",".join(fileio.fmt_float(t) for t in fmr_targets))],
        )
        rep = vulnerability_table(
            {(model, morph_type): mated_set},
            {model: nonmated_set},
            fmr_targets,
            include_fmmpmr=include_fmmpmr,
            provenance=prov,
        )
        fileio.save_report(out, rep)
        click.echo(f"wrote {len(rep.cells)} metric cells to {out}")

    _guarded(run)


@main.command("mad")
@click.option("--scores", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--bpcer", "bpcer_targets", multiple=True, type=float,
              default=report_mod.DEFAULT_BPCER_TARGETS, show_default=True)
@click.option("--model", default="default", show_default=True)
@click.option("--morph-type", default="default", show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def cmd_mad(scores, bpcer_targets, model, morph_type, out):
    """Compute EER and APCER at fixed BPCER budgets from detection scores."""

    def run():
        score_set = fileio.load_mad(scores)
        prov = _provenance(
            [scores],
            [("bpcer_targets", ",".join(fileio.fmt_float(t) for t in bpcer_targets))],
        )
        rep = report_mod.mad_table(
            {(model, morph_type): score_set}, bpcer_targets, provenance=prov
        )
        fileio.save_report(out, rep)
        click.echo(f"wrote {len(rep.cells)} metric cells to {out}")

    _guarded(run)


@main.command("report")
@click.argument("metrics_files", nargs=-1, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", default=None, type=click.Path(dir_okay=False))
@click.option("--format", "fmt", default="text", show_default=True,
              type=click.Choice(["text", "json"]))
def cmd_report(metrics_files, out, fmt):
    """Merge metric report files and render them as text tables or JSON."""

    def run():
        if not metrics_files:
            raise MorphlabError("no metrics files given")
        reports = [fileio.load_report(p) for p in metrics_files]
        merged = report_mod.merge_reports(reports)
        if fmt == "text":
            rendered = "\n".join(report_mod.render_text(r) for r in merged)
        else:
            bundle = {
                "format": "morphlab-report-bundle-v1",
                "reports": [json.loads(fileio.report_to_json(r)) for r in merged],
            }
            rendered = json.dumps(bundle, indent=2) + "\n"
        if out is None:
            click.echo(rendered, nl=False)
        else:
            Path(out).write_text(rendered, encoding="utf-8")

    _guarded(run)


if __name__ == "__main__":
    main()
