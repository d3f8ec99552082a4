"""Deterministic report files and figures.

CSV and JSON are the report contracts: identical configs and seeds must
produce byte-identical files, so floats are rendered with a fixed %.17g
format, JSON keys are sorted, and all summation orders upstream are fixed.
The manifest (command, resolved config, version, timestamps, output hashes)
is metadata about a run and is excluded from the byte-identity contract.

Figures are rendered to PNG alongside the delimited output on the same data;
they are a convenience view, the CSV stays authoritative.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from typing import Dict, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from . import __version__


def fmt_value(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt_value(v) for v in row) + "\n")
    return path


def write_json(path: str, payload: Dict) -> str:
    with open(path, "w") as f:
        json.dump(payload, f, sort_keys=True, indent=1, allow_nan=True)
        f.write("\n")
    return path


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(outdir: str, command: str, config: Dict, outputs: List[str]) -> str:
    manifest = {
        "command": command,
        "config": config,
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime()),
        "outputs": [
            {
                "path": os.path.basename(p),
                "sha256": file_sha256(p),
                "bytes": os.path.getsize(p),
            }
            for p in outputs
        ],
    }
    path = os.path.join(outdir, "manifest.json")
    return write_json(path, manifest)


def plot_error_curve(path: str, xs, ys, xlabel: str, ylabel: str, title: str,
                     loglog: bool = True, extra: Optional[Dict[str, tuple]] = None):
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    plot = ax.loglog if loglog else ax.plot
    plot(xs, ys, "o-", lw=1.2, label=ylabel)
    if extra:
        for label, (exs, eys) in extra.items():
            plot(exs, eys, "s--", lw=1.0, label=label)
        ax.legend(fontsize=8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=10)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def plot_trajectory_norms(path: str, diagnostics: List[Dict], title: str):
    s = [d["s"] for d in diagnostics]
    l2 = [d["l2"] for d in diagnostics]
    bm = [max(d.get("boundary_mass", 0.0), 1e-18) for d in diagnostics]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.2))
    ax1.plot(s, l2, lw=1.2)
    ax1.set_xlabel("s")
    ax1.set_ylabel("L2 norm")
    ax1.grid(alpha=0.3)
    ax2.semilogy(s, bm, lw=1.2, color="firebrick")
    ax2.set_xlabel("s")
    ax2.set_ylabel("boundary mass")
    ax2.grid(alpha=0.3)
    fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
