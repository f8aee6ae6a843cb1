"""Hand-tracking backends behind one tiny seam.

``read()`` returns the landmarks of the most confident hand as a list of 21
(x, y, z) triples in normalized image coordinates, or None when no hand is
in view. The synthetic backend produces a deterministic moving hand so the
whole bridge can run and be tested without a camera.
"""

from __future__ import annotations

import math
from typing import Protocol


class Tracker(Protocol):
    def start(self, width: int, height: int) -> None: ...
    def read(self) -> list[tuple[float, float, float]] | None: ...
    def stop(self) -> None: ...


class SyntheticTracker:
    """Deterministic stand-in: an open hand orbiting the frame center.

    Every ``absent_every``-th sample reports no hand, so downstream code
    exercises the hand-lost path too.
    """

    def __init__(self, absent_every: int = 50):
        self.absent_every = absent_every
        self._i = 0

    def start(self, width: int, height: int) -> None:
        self._i = 0

    def stop(self) -> None:
        pass

    def read(self) -> list[tuple[float, float, float]] | None:
        i = self._i
        self._i += 1
        if self.absent_every and i % self.absent_every == self.absent_every - 1:
            return None
        cx = 0.5 + 0.15 * math.cos(i * 0.05)
        cy = 0.45 + 0.10 * math.sin(i * 0.05)
        wrist = (cx, cy + 0.18, 0.0)
        lms = [wrist]
        # five fingers fanning upward; index extended and slightly closer
        # to the camera so real gesture logic downstream sees variety
        for f, (ux, uy) in enumerate(
            ((-0.95, -0.25), (-0.3, -0.95), (0.0, -1.0), (0.3, -0.95), (0.5, -0.85))
        ):
            n = math.hypot(ux, uy)
            ux, uy = ux / n, uy / n
            tip_len = 0.20 if f == 1 else 0.11
            z_tip = -0.07 if f == 1 else -0.01
            for frac, z in ((0.3, -0.005), (0.55, -0.005), (0.8, -0.008), (1.0, z_tip)):
                lms.append((
                    min(1.0, max(0.0, wrist[0] + ux * tip_len * frac)),
                    min(1.0, max(0.0, wrist[1] + uy * tip_len * frac)),
                    z,
                ))
        return lms


class CameraTracker:
    """Webcam + neural hand tracker; imports its heavyweight deps lazily.

    When several hands are detected, the highest-confidence one is
    forwarded; the bridge itself applies no gesture logic whatsoever.
    """

    def __init__(self, camera_index: int = 0, min_detection_confidence: float = 0.5,
                 min_tracking_confidence: float = 0.5):
        self.camera_index = camera_index
        self.min_detection_confidence = min_detection_confidence
        self.min_tracking_confidence = min_tracking_confidence
        self._cap = None
        self._hands = None

    def start(self, width: int, height: int) -> None:
        try:
            import cv2
            import mediapipe as mp
        except ImportError as e:
            raise RuntimeError(
                "camera mode needs opencv-python and mediapipe "
                "(pip install 'tsbridge[camera]'); use --mock without them"
            ) from e
        self._cv2 = cv2
        self._cap = cv2.VideoCapture(self.camera_index)
        if not self._cap.isOpened():
            raise RuntimeError(f"camera {self.camera_index} unavailable")
        self._cap.set(cv2.CAP_PROP_FRAME_WIDTH, width)
        self._cap.set(cv2.CAP_PROP_FRAME_HEIGHT, height)
        self._hands = mp.solutions.hands.Hands(
            max_num_hands=2,
            min_detection_confidence=self.min_detection_confidence,
            min_tracking_confidence=self.min_tracking_confidence,
        )

    def stop(self) -> None:
        if self._cap is not None:
            self._cap.release()
        if self._hands is not None:
            self._hands.close()

    def read(self) -> list[tuple[float, float, float]] | None:
        ok, frame = self._cap.read()
        if not ok:
            return None
        rgb = self._cv2.cvtColor(frame, self._cv2.COLOR_BGR2RGB)
        result = self._hands.process(rgb)
        if not result.multi_hand_landmarks:
            return None
        best_idx = 0
        if result.multi_handedness and len(result.multi_hand_landmarks) > 1:
            scores = [h.classification[0].score for h in result.multi_handedness]
            best_idx = scores.index(max(scores))
        hand = result.multi_hand_landmarks[best_idx]
        return [(lm.x, lm.y, lm.z) for lm in hand.landmark]
