"""Bernoulli link model for data frames, ACKs and receiver-side CCA."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional


@dataclass
class LossModel:
    """Independent per-attempt losses, shared by both link directions.

    The generator is Python's Mersenne Twister seeded from ``seed``; a draw
    is only consumed when the receiver actually listens.
    """

    eps_f: float = 0.126
    eps_a: float = 0.080
    seed: int = 0
    cca_detect_prob: float = 1.0
    rng: random.Random = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("eps_f", "eps_a", "cca_detect_prob"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        self.rng = random.Random(self.seed)

    def reseed(self, seed: int) -> None:
        self.seed = seed
        self.rng = random.Random(seed)

    def draw(self):
        """Return ``(frame_delivered, ack_delivered)`` as booleans."""
        rnd = self.rng.random
        if rnd() < self.eps_f:
            return False, False
        return True, rnd() >= self.eps_a


@dataclass(frozen=True)
class AttemptOutcome:
    frame_delivered: bool
    ack_delivered: Optional[bool]

    @property
    def confirmed(self) -> bool:
        return bool(self.frame_delivered and self.ack_delivered)


def draw_attempt(model: LossModel) -> AttemptOutcome:
    frame, ack = model.draw()
    return AttemptOutcome(frame, ack if frame else None)


def cca_observe(tx_active: bool, model: Optional[LossModel] = None) -> bool:
    """Receiver CCA: busy iff the peer radiates in this cell.

    Detection is perfect unless ``model.cca_detect_prob`` < 1, in which case
    one extra draw decides whether the activity is noticed.
    """
    if not tx_active:
        return False
    if model is None or model.cca_detect_prob >= 1.0:
        return True
    return model.rng.random() < model.cca_detect_prob
