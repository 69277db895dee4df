"""The six-class emotion label space shared by dataset, model, and reports."""

from __future__ import annotations

from enum import Enum


class EmotionLabel(Enum):
    NEUTRAL = 0
    CALM = 1
    HAPPY = 2
    SAD = 3
    ANGRY = 4
    FEARFUL = 5

    @property
    def class_index(self) -> int:
        return self.value

    @property
    def label_name(self) -> str:
        return self.name.lower()

    @classmethod
    def from_index(cls, index: int) -> "EmotionLabel":
        return cls(index)

    @classmethod
    def from_name(cls, name: str) -> "EmotionLabel":
        return cls[name.upper()]


N_CLASSES = len(EmotionLabel)
LABEL_NAMES = [label.label_name for label in EmotionLabel]
