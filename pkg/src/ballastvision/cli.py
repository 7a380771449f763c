"""Batch command line: process images or directories into overlays and
machine-readable reports, or serve the interactive tuning API.

Config precedence: built-in defaults, then --config file, then flags.
Exit codes: 0 all images succeeded, 1 some failed, 2 usage error.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from . import __version__
from .errors import BallastError, ConfigError
from .image import load_image, save_png
from .pipeline import (
    PipelineComputation,
    config_digest,
    config_from_dict,
    config_to_dict,
    default_config,
)

log = logging.getLogger("ballastvision")

CSV_COLUMNS = (
    "image",
    "mode",
    "final_pds",
    "pds_top",
    "pds_middle",
    "pds_bottom",
    "n_small",
    "n_typical",
    "n_large",
    "n_convexfail",
    "params_digest",
)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class BatchReportRow:
    image_path: str
    mode: str
    final_pds: float
    per_layer_pds: tuple[float, float, float] | None
    n_small: int
    n_typical: int
    n_large: int
    n_convexfail: int
    params_digest: str

    def to_json_obj(self) -> dict:
        obj: dict = {
            "image": self.image_path,
            "mode": self.mode,
            "final_pds": self.final_pds,
        }
        if self.per_layer_pds is not None:
            obj["pds_top"], obj["pds_middle"], obj["pds_bottom"] = self.per_layer_pds
        obj.update(
            n_small=self.n_small,
            n_typical=self.n_typical,
            n_large=self.n_large,
            n_convexfail=self.n_convexfail,
            params_digest=self.params_digest,
        )
        return obj

    def to_csv_row(self) -> list[str]:
        per_layer = (
            ("", "", "")
            if self.per_layer_pds is None
            else tuple(f"{v:.2f}" for v in self.per_layer_pds)
        )
        return [
            self.image_path,
            self.mode,
            f"{self.final_pds:.2f}",
            *per_layer,
            str(self.n_small),
            str(self.n_typical),
            str(self.n_large),
            str(self.n_convexfail),
            self.params_digest,
        ]


def emit_report(rows: list[BatchReportRow], fmt: str, path: Path) -> None:
    """Write the batch report as CSV (fixed header) or a JSON array."""
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow(row.to_csv_row())
    elif fmt == "json":
        with open(path, "w") as fh:
            json.dump([r.to_json_obj() for r in rows], fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def _setup_logging() -> None:
    level = os.environ.get("BALLAST_LOG", "warn").lower()
    mapping = {
        "error": logging.ERROR,
        "warn": logging.WARNING,
        "info": logging.INFO,
        "debug": logging.DEBUG,
    }
    logging.basicConfig(
        level=mapping.get(level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _parse_triple(value: str, name: str, cast) -> tuple:
    """Parse 'v' or 'v,v,v' into a per-layer triple."""
    parts = [p.strip() for p in value.split(",")]
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3:
        raise click.UsageError(f"--{name} takes one value or three comma-separated values")
    try:
        return tuple(cast(p) for p in parts)
    except ValueError:
        raise click.UsageError(f"--{name}: could not parse {value!r}")


def _collect_inputs(input_path: Path) -> list[Path]:
    if input_path.is_dir():
        return sorted(
            p for p in input_path.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES
        )
    return [input_path]


def _build_config_doc(config_file, mode, gamma, brightness, reference, strel, sigma_s, sigma_r, convex_threshold, ball_area_px) -> dict:
    doc = config_to_dict(default_config())
    if config_file is not None:
        try:
            loaded = json.loads(Path(config_file).read_text())
        except json.JSONDecodeError as exc:
            raise click.UsageError(f"--config {config_file}: invalid JSON ({exc})")
        if not isinstance(loaded, dict):
            raise click.UsageError(f"--config {config_file}: top level must be an object")
        from .pipeline import merge_config_dicts

        doc = merge_config_dicts(doc, loaded)
    if mode is not None:
        doc["mode"] = mode
    if gamma is not None or brightness is not None:
        doc["tone"] = {
            "gamma": gamma if gamma is not None else 1.0,
            "brightness_gain": brightness if brightness is not None else 1.0,
        }
    if reference is not None:
        doc["reference_image"] = str(reference)
    if strel is not None:
        for layer_doc, v in zip(doc["layers"], _parse_triple(strel, "strel", int)):
            layer_doc["seg"]["strel_radius"] = v
    if sigma_s is not None:
        for layer_doc, v in zip(doc["layers"], _parse_triple(sigma_s, "sigma-s", float)):
            layer_doc["bilateral"]["sigma_s"] = v
    if sigma_r is not None:
        for layer_doc, v in zip(doc["layers"], _parse_triple(sigma_r, "sigma-r", float)):
            layer_doc["bilateral"]["sigma_r"] = v
    if convex_threshold is not None:
        doc["calibration"]["convex_threshold"] = convex_threshold
    if ball_area_px is not None:
        doc["calibration"]["ball_area_px"] = float(ball_area_px)
    return doc


@click.group()
def main() -> None:
    """Ballast degradation evaluation from cross-section images."""
    _setup_logging()


@main.command("process")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True, path_type=Path), help="Image file or directory of PNG/JPEG images.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False, path_type=Path), help="Output directory for overlays and reports.")
@click.option("--config", "config_file", type=click.Path(exists=True, path_type=Path), help="JSON config file.")
@click.option("--mode", type=click.Choice(["stitched", "averaged"]), default=None)
@click.option("--gamma", type=float, default=None, help="Gamma exponent for tone correction.")
@click.option("--brightness", type=float, default=None, help="Brightness gain (1.0 = unchanged).")
@click.option("--reference", type=click.Path(exists=True, path_type=Path), default=None, help="Reference image for histogram matching.")
@click.option("--strel", type=str, default=None, help="Strel radius, one value or top,middle,bottom.")
@click.option("--sigma-s", type=str, default=None, help="Spatial Gaussian width(s).")
@click.option("--sigma-r", type=str, default=None, help="Range Gaussian width(s), 0-255 scale.")
@click.option("--convex-threshold", type=float, default=None)
@click.option("--ball-area-px", type=float, default=None, help="Pixel area of the 1-in. calibration ball.")
@click.option("--report", "report_fmt", type=click.Choice(["csv", "json", "both"]), default="both")
def process_cmd(input_path, out_dir, config_file, mode, gamma, brightness, reference, strel, sigma_s, sigma_r, convex_threshold, ball_area_px, report_fmt):
    """Process images into overlays plus a batch report."""
    doc = _build_config_doc(
        config_file, mode, gamma, brightness, reference, strel, sigma_s, sigma_r,
        convex_threshold, ball_area_px,
    )
    try:
        cfg = config_from_dict(doc)
    except ConfigError as exc:
        raise click.UsageError(f"invalid configuration: {exc}")

    inputs = _collect_inputs(input_path)
    if not inputs:
        raise click.UsageError(f"no PNG/JPEG images found in {input_path}")
    out_dir.mkdir(parents=True, exist_ok=True)

    digest = config_digest(cfg)
    rows: list[BatchReportRow] = []
    failures = 0
    for path in inputs:
        try:
            img = load_image(path)
            comp = PipelineComputation(img, cfg)
            report = comp.report()
            save_png(comp.overlay(), out_dir / f"{path.stem}.overlay.png")
        except (BallastError, OSError) as exc:
            failures += 1
            log.error("failed to process %s: %s", path, exc)
            click.echo(f"FAILED {path}: {exc}", err=True)
            continue
        counts = report.category_counts()
        rows.append(
            BatchReportRow(
                image_path=str(path),
                mode=report.mode,
                final_pds=report.final_pds,
                per_layer_pds=report.per_layer_pds,
                n_small=counts["small"],
                n_typical=counts["typical"],
                n_large=counts["large"],
                n_convexfail=counts["convex_fail"],
                params_digest=digest,
            )
        )
        click.echo(f"{path}: PDS {report.final_pds:.2f}%")

    if report_fmt in ("csv", "both"):
        emit_report(rows, "csv", out_dir / "report.csv")
    if report_fmt in ("json", "both"):
        emit_report(rows, "json", out_dir / "report.json")
    sys.exit(1 if failures else 0)


@main.command("serve")
@click.option("--port", type=int, default=8400)
@click.option("--host", type=str, default="127.0.0.1")
@click.option("--max-upload-mb", type=int, default=50)
@click.option("--session-ttl-sec", type=int, default=3600)
@click.option("--static-dir", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None, help="Directory with the tuner UI bundle.")
@click.option("--session-dir", type=click.Path(file_okay=False, path_type=Path), default=None, help="Spill uploaded images to disk.")
def serve_cmd(port, host, max_upload_mb, session_ttl_sec, static_dir, session_dir):
    """Serve the interactive parameter-tuning API (and UI if bundled)."""
    import uvicorn

    from .service import create_app

    app = create_app(
        max_upload_mb=max_upload_mb,
        session_ttl_sec=session_ttl_sec,
        static_dir=static_dir,
        session_dir=session_dir,
    )
    uvicorn.run(app, host=host, port=port)


@main.command("version")
def version_cmd():
    """Print the package version."""
    click.echo(__version__)


if __name__ == "__main__":
    main()
