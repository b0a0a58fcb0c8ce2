"""Model file container.

Layout::

    b"PFXMODEL"            8-byte magic
    uint32 LE              header length H
    H bytes                JSON header (version, config, labels, array table)
    uint64 LE              payload length P
    P bytes                float64 LE arrays, concatenated in array-table order
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ModelFormatError
from .pipeline import PipelineConfig, TrainedModel
from .reduce import FeatureScale, Projection
from .svm import BinarySvm, KernelSpec, OvoEnsemble

MAGIC = b"PFXMODEL"
FORMAT_VERSION = 1


def dumps(model: TrainedModel) -> bytes:
    arrays = []

    def put(name, arr):
        arr = np.asarray(arr, dtype="<f8")
        arrays.append((name, arr))

    proj = model.projection
    put("scale.mean", proj.scale.mean)
    put("scale.std", proj.scale.std)
    put("pca.mean", proj.pca_mean)
    put("pca.basis", proj.pca_basis)
    put("lda.basis", proj.lda_basis)
    machines = []
    for idx, ((a, b), svm) in enumerate(model.ensemble.members.items()):
        put(f"svm{idx}.support_vectors", svm.support_vectors)
        put(f"svm{idx}.dual_coef", svm.dual_coef)
        put(f"svm{idx}.bias", [svm.bias])
        machines.append({
            "pair": [int(a), int(b)],
            "kernel": svm.kernel.to_json(),
            "C": svm.C,
            "n_train": list(svm.n_train),
            "n_iter": svm.n_iter,
        })
    header = {
        "format_version": FORMAT_VERSION,
        "config": model.config.to_json(),
        "class_names": list(model.class_names),
        "classes": [int(c) for c in model.ensemble.classes],
        "machines": machines,
        "arrays": [{"name": n, "shape": list(a.shape)} for n, a in arrays],
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = b"".join(a.tobytes(order="C") for _, a in arrays)
    return MAGIC + struct.pack("<I", len(head)) + head + struct.pack("<Q", len(payload)) + payload


def loads(blob: bytes) -> TrainedModel:
    try:
        return _loads(blob)
    except ModelFormatError:
        raise
    except (KeyError, TypeError, ValueError, struct.error, json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ModelFormatError(f"malformed model file: {exc}") from exc


def _loads(blob: bytes) -> TrainedModel:
    if blob[:len(MAGIC)] != MAGIC:
        raise ModelFormatError("not a model file (bad magic)")
    pos = len(MAGIC)
    (hlen,) = struct.unpack_from("<I", blob, pos)
    pos += 4
    header = json.loads(blob[pos:pos + hlen].decode("utf-8"))
    pos += hlen
    if header.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported model format version {header.get('format_version')!r}")
    (plen,) = struct.unpack_from("<Q", blob, pos)
    pos += 8
    payload = blob[pos:]
    if len(payload) != plen:
        raise ModelFormatError("model payload truncated or padded")
    arrays, off = {}, 0
    for entry in header["arrays"]:
        shape = tuple(int(s) for s in entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        if off + 8 * count > plen:
            raise ModelFormatError("array table exceeds payload")
        arrays[entry["name"]] = np.frombuffer(payload, dtype="<f8", count=count, offset=off).reshape(shape).copy()
        off += 8 * count
    if off != plen:
        raise ModelFormatError("payload length does not match array table")

    config = PipelineConfig.from_json(header["config"])
    proj = Projection(
        FeatureScale(arrays["scale.mean"], arrays["scale.std"]),
        arrays["pca.mean"], arrays["pca.basis"], arrays["lda.basis"],
    )
    members = {}
    for idx, m in enumerate(header["machines"]):
        pair = tuple(int(v) for v in m["pair"])
        members[pair] = BinarySvm(
            support_vectors=arrays[f"svm{idx}.support_vectors"],
            dual_coef=arrays[f"svm{idx}.dual_coef"],
            bias=float(arrays[f"svm{idx}.bias"][0]),
            kernel=KernelSpec.from_json(m["kernel"]),
            pair=pair,
            C=float(m["C"]),
            n_train=tuple(int(v) for v in m["n_train"]),
            n_iter=int(m["n_iter"]),
        )
    ens = OvoEnsemble(tuple(int(c) for c in header["classes"]), members)
    return TrainedModel(config, proj, ens, tuple(header["class_names"]))


def save_model(model: TrainedModel, path) -> None:
    Path(path).write_bytes(dumps(model))


def load_model(path) -> TrainedModel:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model {path}: {exc}") from exc
    return loads(blob)
