"""Decentralised protocol that spreads the agents evenly (in the ellipse
parameter) around the orbit.

Each agent broadcasts its parameter value and three monotone flags every tick:

* ``fl_O`` - the agent is on the orbit (``|gamma - 1| < gamma_Th``);
* ``fl_R`` - the agent holds its spacing behind its neighbour; the chain
  starts at the agent directly behind agent 1 and runs backwards round the
  ring;
* ``fl_H`` - the ring has settled; all agents descend to the mission altitude.

Agent 1 flies the plain nominal profile until the agent ahead of it reports
ready, then joins the correction law like everyone else.
"""
from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

from .geometry import TAU, EllipseAxes, OrbitCoords, normalize_angle, wrap_to_2pi
from .speed_control import scaled_speed_factor

_BODY = struct.Struct("<BdB")
_CRC = struct.Struct("<I")
FRAME_SIZE = _BODY.size + _CRC.size  # 14

FLAG_R, FLAG_H, FLAG_O = 0x01, 0x02, 0x04


class PacketError(ValueError):
    pass


@dataclass(frozen=True)
class AgentPacket:
    agent_index: int
    s_A: float
    fl_R: bool = False
    fl_H: bool = False
    fl_O: bool = False


def encode_packet(packet: AgentPacket) -> bytes:
    """Serialise to the 14-byte frame: u8 index, f64 s_A, u8 flags, u32 CRC-32 (all LE)."""
    if not 1 <= packet.agent_index <= 255:
        raise PacketError(f"agent index {packet.agent_index} does not fit in a u8")
    flags = (FLAG_R if packet.fl_R else 0) | (FLAG_H if packet.fl_H else 0) | (FLAG_O if packet.fl_O else 0)
    body = _BODY.pack(packet.agent_index, packet.s_A, flags)
    return body + _CRC.pack(zlib.crc32(body))


def decode_packet(frame: bytes, n_agents: Optional[int] = None) -> AgentPacket:
    if len(frame) != FRAME_SIZE:
        raise PacketError(f"frame length {len(frame)} != {FRAME_SIZE}")
    body, (crc,) = frame[:_BODY.size], _CRC.unpack(frame[_BODY.size:])
    if zlib.crc32(body) != crc:
        raise PacketError("checksum mismatch")
    index, s_A, flags = _BODY.unpack(body)
    if index < 1 or (n_agents is not None and index > n_agents):
        raise PacketError(f"agent index {index} out of range")
    if flags & ~(FLAG_R | FLAG_H | FLAG_O):
        raise PacketError(f"unknown flag bits 0x{flags:02x}")
    return AgentPacket(index, s_A, bool(flags & FLAG_R), bool(flags & FLAG_H), bool(flags & FLAG_O))


@dataclass
class PeerTable:
    """Latest values heard from each agent, indexed 1..N_A (slot 0 unused)."""

    n_agents: int
    s_A: List[Optional[float]] = field(init=False)
    fl_R: List[bool] = field(init=False)
    fl_H: List[bool] = field(init=False)
    fl_O: List[bool] = field(init=False)

    def __post_init__(self):
        n = self.n_agents + 1
        self.s_A = [None] * n
        self.fl_R = [False] * n
        self.fl_H = [False] * n
        self.fl_O = [False] * n

    def update(self, packet: AgentPacket) -> None:
        i = packet.agent_index
        if not 1 <= i <= self.n_agents:
            raise PacketError(f"agent index {i} out of range")
        self.s_A[i] = packet.s_A
        self.fl_R[i] = packet.fl_R
        self.fl_H[i] = packet.fl_H
        self.fl_O[i] = packet.fl_O

    @classmethod
    def from_values(cls, s_A, fl_R=None, fl_H=None, fl_O=None) -> "PeerTable":
        """Build a fully populated table from per-agent lists (index 0 = agent 1)."""
        n = len(s_A)
        t = cls(n)
        for i in range(n):
            t.update(AgentPacket(i + 1, s_A[i],
                                 bool(fl_R[i]) if fl_R else False,
                                 bool(fl_H[i]) if fl_H else False,
                                 bool(fl_O[i]) if fl_O else False))
        return t


@dataclass
class CoopState:
    my_index: int
    n_agents: int
    k_s: float
    gamma_Th: float = 0.1
    D_Th: float = 0.1
    fl_R: bool = False
    fl_H: bool = False
    fl_O: bool = False

    def __post_init__(self):
        if not 1 <= self.my_index <= self.n_agents:
            raise ValueError(f"agent index {self.my_index} not in 1..{self.n_agents}")

    @property
    def Delta_s(self) -> float:
        return TAU / self.n_agents


class CoopOutput(NamedTuple):
    V_C: float
    D_s: float
    neighbour: Optional[int]
    packet: AgentPacket


def find_neighbour(table: PeerTable, my_index: int, my_s: float) -> Optional[int]:
    """Index of the next agent ahead on the orbit.

    Agents are ordered by ``(s_A, index)`` around the ring, so when two agents
    share a parameter value the lower index has the higher one as neighbour.
    Returns ``None`` when nothing has been heard from any peer yet, and
    ``my_index`` for a single-agent team.
    """
    if table.n_agents == 1:
        return my_index
    my_s = wrap_to_2pi(my_s)
    best, best_key = None, None
    for j in range(1, table.n_agents + 1):
        if j == my_index or table.s_A[j] is None:
            continue
        s_j = wrap_to_2pi(table.s_A[j])
        # peers behind us (or tied with a lower index) come after a full lap;
        # ranking on (lap, s) avoids round-off in forming the gap itself
        behind = s_j < my_s or (s_j == my_s and j < my_index)
        key = (behind, s_j, j)
        if best_key is None or key < best_key:
            best, best_key = j, key
    return best


def separation_error(my_s: float, neighbour_s: float, Delta_s: float) -> float:
    return normalize_angle(normalize_angle(neighbour_s - my_s) - Delta_s)


def correction_speed(D_s: float, coords: OrbitCoords, axes: EllipseAxes, k_s: float) -> float:
    return scaled_speed_factor(coords.s_A, coords.gamma_A, axes) * k_s * D_s


def coop_step(state: CoopState, table: PeerTable, coords: OrbitCoords,
              axes: EllipseAxes) -> CoopOutput:
    """One pass of the cooperation logic for the agent owning ``state``.

    ``table`` holds what was received from peers; the agent's own slot is
    refreshed here. ``state`` flags are updated in place.
    """
    i = state.my_index
    table.update(AgentPacket(i, coords.s_A, state.fl_R, state.fl_H, state.fl_O))

    i_N = find_neighbour(table, i, coords.s_A)
    D_s = 0.0
    V_C = 0.0
    if abs(coords.gamma_A - 1.0) < state.gamma_Th:
        state.fl_O = True

    if i_N is not None:
        D_s = separation_error(coords.s_A, table.s_A[i_N], state.Delta_s)
        if state.fl_O and table.fl_O[i_N]:
            close = abs(D_s) < state.D_Th
            if i_N == 1 and close:
                state.fl_R = True
            elif table.fl_R[i_N] and close:
                state.fl_R = True
            if table.fl_H[i_N]:
                state.fl_H = True
            if i == 1:
                if table.fl_R[i_N]:
                    V_C = correction_speed(D_s, coords, axes, state.k_s)
                    state.fl_H = True
            else:
                V_C = correction_speed(D_s, coords, axes, state.k_s)

    packet = AgentPacket(i, coords.s_A, state.fl_R, state.fl_H, state.fl_O)
    table.update(packet)
    return CoopOutput(V_C, D_s, i_N, packet)
