"""Checkpoint container and population manifest.

Checkpoint file layout (all little-endian):
  8-byte magic, uint32 format version, uint64 header length, UTF-8 JSON
  header, then the flat float32 parameter arrays in header table order.
The header carries the encoder config(s) and per-tensor shape table, so a
checkpoint is self-describing.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from ..core.types import DEFAULT_CONFIG, KitchenConfig, Layout
from ..observations import EncoderConfig
from .neural import ActorCriticNet, HierarchicalPolicy, NetworkSpec, NeuralPolicy
from .policies import Policy

MAGIC = b"COOPKCK1"
FORMAT_VERSION = 1


class CorruptCheckpoint(Exception):
    pass


class VersionMismatch(Exception):
    pass


def params_hash(net: ActorCriticNet) -> str:
    h = hashlib.blake2b(digest_size=8)
    for _, tensor in sorted(net.state_dict().items()):
        h.update(tensor.detach().numpy().astype("<f4").tobytes())
    return h.hexdigest()


def _net_header(net: ActorCriticNet) -> tuple[dict, list[np.ndarray]]:
    table = []
    arrays = []
    for name, tensor in net.state_dict().items():
        arr = tensor.detach().numpy().astype("<f4")
        table.append({"name": name, "shape": list(arr.shape)})
        arrays.append(arr)
    return {"spec": net.spec.to_dict(), "tensors": table}, arrays


def _read_net(header: dict, blob: bytes, offset: int) -> tuple[ActorCriticNet, int]:
    spec = NetworkSpec.from_dict(header["spec"])
    net = ActorCriticNet(spec)
    state = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        nbytes = count * 4
        if offset + nbytes > len(blob):
            raise CorruptCheckpoint("parameter blob truncated")
        arr = np.frombuffer(blob, dtype="<f4", count=count, offset=offset).reshape(shape)
        state[entry["name"]] = torch.from_numpy(arr.copy())
        offset += nbytes
    net.load_state_dict(state)
    return net, offset


def save_checkpoint(policy: Policy, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(policy, NeuralPolicy):
        net_header, arrays = _net_header(policy.net)
        header = {
            "kind": "flat",
            "id": policy.id,
            "encoder": policy.encoder.to_dict(),
            "net": net_header,
            "params_hash": params_hash(policy.net),
        }
    elif isinstance(policy, HierarchicalPolicy):
        m_header, m_arrays = _net_header(policy.manager_net)
        w_header, w_arrays = _net_header(policy.worker_net)
        arrays = m_arrays + w_arrays
        header = {
            "kind": "hierarchical",
            "id": policy.id,
            "manager_encoder": policy.manager_encoder.to_dict(),
            "worker_encoder": policy.worker_encoder.to_dict(),
            "manager_net": m_header,
            "worker_net": w_header,
            "use_reachability": policy.use_reachability,
            "params_hash": params_hash(policy.manager_net) + params_hash(policy.worker_net),
        }
    else:
        raise TypeError(f"cannot checkpoint {type(policy).__name__}")
    header_bytes = json.dumps(header).encode()
    with path.open("wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IQ", FORMAT_VERSION, len(header_bytes)))
        f.write(header_bytes)
        for arr in arrays:
            f.write(arr.tobytes())


def load_checkpoint(
    path: str | Path,
    mode: str = "stochastic",
    kitchen: KitchenConfig = DEFAULT_CONFIG,
) -> Policy:
    data = Path(path).read_bytes()
    if len(data) < len(MAGIC) + 12 or data[: len(MAGIC)] != MAGIC:
        raise CorruptCheckpoint(f"{path}: bad magic")
    version, header_len = struct.unpack_from("<IQ", data, len(MAGIC))
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{path}: format version {version}")
    start = len(MAGIC) + 12
    try:
        header = json.loads(data[start:start + header_len])
    except ValueError as exc:
        raise CorruptCheckpoint(f"{path}: unreadable header") from exc
    offset = start + header_len
    if header["kind"] == "flat":
        net, offset = _read_net(header["net"], data, offset)
        return NeuralPolicy(
            net,
            EncoderConfig.from_dict(header["encoder"]),
            policy_id=header["id"],
            mode=mode,
            kitchen=kitchen,
        )
    if header["kind"] == "hierarchical":
        m_net, offset = _read_net(header["manager_net"], data, offset)
        w_net, offset = _read_net(header["worker_net"], data, offset)
        return HierarchicalPolicy(
            m_net,
            EncoderConfig.from_dict(header["manager_encoder"]),
            w_net,
            EncoderConfig.from_dict(header["worker_encoder"]),
            policy_id=header["id"],
            mode=mode,
            kitchen=kitchen,
            use_reachability=header.get("use_reachability", True),
        )
    raise CorruptCheckpoint(f"{path}: unknown kind {header['kind']!r}")


# Population manifest ---------------------------------------------------------

STAGES = ("init", "mid", "final")


@dataclass(frozen=True)
class PopulationEntry:
    agent_id: str
    seed: int
    hidden_dim: int
    frame_stack: bool
    stage: str
    path: str | None  # None for mid entries, which resolve per layout
    path_by_layout: dict | None = None

    def resolve(self, layout_name: str) -> str:
        if self.path is not None:
            return self.path
        try:
            return self.path_by_layout[layout_name]
        except (TypeError, KeyError):
            raise KeyError(
                f"no mid checkpoint recorded for {self.agent_id} on {layout_name}"
            )


class Population:
    """8 base agents x {init, mid, final} = 24 checkpoint handles."""

    def __init__(self, entries: list[PopulationEntry], root: Path):
        self.entries = entries
        self.root = root
        by_agent: dict[str, set[str]] = {}
        for e in entries:
            by_agent.setdefault(e.agent_id, set()).add(e.stage)
        for agent_id, stages in by_agent.items():
            if stages != set(STAGES):
                raise ValueError(f"agent {agent_id} has stages {sorted(stages)}")

    def __len__(self) -> int:
        return len(self.entries)

    def load_handles(
        self, layout: Layout, mode: str = "stochastic",
        kitchen: KitchenConfig = DEFAULT_CONFIG,
    ) -> list[Policy]:
        out = []
        for e in self.entries:
            path = self.root / e.resolve(layout.name)
            policy = load_checkpoint(path, mode=mode, kitchen=kitchen)
            policy.id = f"{e.agent_id}:{e.stage}"
            out.append(policy)
        return out


def save_population_manifest(entries: list[PopulationEntry], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "entries": [
            {
                "agent_id": e.agent_id,
                "seed": e.seed,
                "hidden_dim": e.hidden_dim,
                "frame_stack": e.frame_stack,
                "stage": e.stage,
                "path": e.path,
                "path_by_layout": e.path_by_layout,
            }
            for e in entries
        ]
    }
    path.write_text(json.dumps(payload, indent=2))


def load_population_manifest(path: str | Path) -> Population:
    path = Path(path)
    payload = json.loads(path.read_text())
    entries = [PopulationEntry(**item) for item in payload["entries"]]
    return Population(entries, root=path.parent)
