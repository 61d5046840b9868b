"""On-disk artifact formats: policy tables, wealth samples, report CSVs.

Policy file (text, one value per float64, lossless via %.17g):

    # ifpkit policy v1
    # tool_version: <semver>
    # model_sha256: <hex or ->
    # seed: <int or ->
    # beta: / # gamma: / # utility: / # alpha:
    # grid_spacing: linear|log
    # n_grid: <G> / # n_states: <S>
    # state: <chi> <mu> <sigma>          (S lines, composite order)
    # slopes: <S floats>
    # thresholds: <S floats>
    # columns: asset consumption[z=0..S-1]
    <asset> <c_0> ... <c_{S-1}>          (G rows)

Samples are stored as a float64 binary column (.npy) for assets, an int64
column for states, and a JSON sidecar with provenance (seed, config hash,
policy file hash).  `--format csv` swaps the binary columns for a CSV.

Report CSVs start with `# key: value` provenance lines (tool version,
config hash, seed); identical inputs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from .coleman import AssetGrid, ConsumptionPolicy
from .simulate import WealthSample

TOOL_VERSION = "0.1.0"


def _fmt(x):
    return format(float(x), ".17g")


def _fmt_vec(v):
    return " ".join(_fmt(x) for x in v)


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_policy(path, policy, model, model_sha256="-", seed="-"):
    thr = policy.thresholds if policy.thresholds is not None else np.full(policy.n_states, -np.inf)
    triples = model.process.state_triples
    lines = [
        "# ifpkit policy v1",
        f"# tool_version: {TOOL_VERSION}",
        f"# model_sha256: {model_sha256}",
        f"# seed: {seed}",
        f"# beta: {_fmt(model.beta)}",
        f"# gamma: {_fmt(model.utility.gamma)}",
        f"# utility: {model.utility.kind}",
        f"# alpha: {_fmt(policy.alpha)}",
        f"# grid_spacing: {policy.grid.spacing}",
        f"# n_grid: {policy.grid.n}",
        f"# n_states: {policy.n_states}",
    ]
    for s in range(policy.n_states):
        lines.append(f"# state: {_fmt_vec(triples[s])}")
    lines.append(f"# slopes: {_fmt_vec(policy.slopes)}")
    lines.append(f"# thresholds: {_fmt_vec(thr)}")
    lines.append("# columns: asset consumption[z=0..S-1]")
    for i in range(policy.grid.n):
        lines.append(f"{_fmt(policy.grid.points[i])} {_fmt_vec(policy.values[i])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_policy(path):
    """Returns (ConsumptionPolicy, header dict)."""
    header = {}
    states = []
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != "# ifpkit policy v1":
            raise ValueError(f"{path}: not an ifpkit policy file")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# state:"):
                states.append([float(x) for x in line.split(":", 1)[1].split()])
            elif line.startswith("#"):
                key, _, value = line[1:].partition(":")
                header[key.strip()] = value.strip()
            else:
                rows.append([float(x) for x in line.split()])
    data = np.asarray(rows)
    n_grid = int(header["n_grid"])
    n_states = int(header["n_states"])
    if data.shape != (n_grid, n_states + 1):
        raise ValueError(f"{path}: malformed policy table")
    slopes = np.array([float(x) for x in header["slopes"].split()])
    thr = np.array([float(x) for x in header["thresholds"].split()])
    policy = ConsumptionPolicy(
        grid=AssetGrid(data[:, 0], header.get("grid_spacing", "linear")),
        values=data[:, 1:],
        slopes=slopes,
        thresholds=None if np.all(np.isneginf(thr)) else thr,
        alpha=float(header.get("alpha", 0.0)),
    )
    header["states"] = np.asarray(states)
    return policy, header


def write_sample(prefix, sample, config_sha256="-", policy_sha256="-", fmt="npy"):
    """Persist a WealthSample under `prefix`; returns the sidecar path."""
    meta = {
        "tool_version": TOOL_VERSION,
        "config_sha256": config_sha256,
        "policy_file_sha256": policy_sha256,
        "format": fmt,
        **{k: v for k, v in sample.meta.items()},
    }
    if fmt == "npy":
        assets_file = prefix + ".assets.npy"
        states_file = prefix + ".states.npy"
        np.save(assets_file, sample.assets)
        np.save(states_file, sample.states)
    elif fmt == "csv":
        assets_file = prefix + ".assets.csv"
        states_file = prefix + ".states.csv"
        with open(assets_file, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("asset\n")
            fh.writelines(_fmt(a) + "\n" for a in sample.assets)
        with open(states_file, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("state\n")
            fh.writelines(f"{int(s)}\n" for s in sample.states)
    else:
        raise ValueError(f"unknown sample format {fmt!r}")
    meta["assets_file"] = os.path.basename(assets_file)
    meta["states_file"] = os.path.basename(states_file)
    meta["assets_sha256"] = sha256_file(assets_file)
    sidecar = prefix + ".json"
    with open(sidecar, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return sidecar


def read_sample(sidecar):
    """Load a sample from its JSON sidecar; verifies the stored data hash."""
    with open(sidecar, "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    base = os.path.dirname(os.path.abspath(sidecar))
    assets_path = os.path.join(base, meta["assets_file"])
    states_path = os.path.join(base, meta["states_file"])
    digest = sha256_file(assets_path)
    if digest != meta.get("assets_sha256", digest):
        raise ValueError(f"{assets_path}: data hash does not match the sidecar")
    if meta.get("format", "npy") == "npy":
        assets = np.load(assets_path)
        states = np.load(states_path)
    else:
        assets = np.loadtxt(assets_path, skiprows=1, dtype=np.float64, ndmin=1)
        states = np.loadtxt(states_path, skiprows=1, dtype=np.int64, ndmin=1)
    return WealthSample(assets=assets, states=states, meta=meta)


def provenance_lines(config_sha256="-", seed="-"):
    return [
        f"# tool_version: {TOOL_VERSION}",
        f"# config_sha256: {config_sha256}",
        f"# seed: {seed}",
    ]


def write_csv(path, header_cells, rows, config_sha256="-", seed="-"):
    """CSV with provenance comment lines; floats at 17 significant digits."""
    lines = provenance_lines(config_sha256, seed)
    lines.append(",".join(str(c) for c in header_cells))
    for row in rows:
        cells = []
        for c in row:
            if isinstance(c, (float, np.floating)):
                cells.append(_fmt(c))
            else:
                cells.append(str(c))
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_report_json(path, report, config_sha256="-", seed="-"):
    doc = {
        "tool_version": TOOL_VERSION,
        "config_sha256": config_sha256,
        "seed": seed,
        **report.as_dict(),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")
