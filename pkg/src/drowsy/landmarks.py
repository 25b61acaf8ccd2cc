"""Landmark frames, indexing schemes, and the adapter onto named semantic points.

Coordinates are 2-D image coordinates with y increasing downward, so "nose
below eye level" is a positive vertical difference. Depth components in
source data are not represented here; parsers drop them.

Each eye is described by the six-point hexagon convention used for aspect
ratios: index 1 and 4 are the horizontal corners, pairs (2, 6) and (3, 5)
are the upper/lower vertical pairs. The mouth uses the same six-point
convention over the inner-lip landmarks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from operator import itemgetter

from .errors import ConfigError, GeometryError, SchemeMapError

Point = tuple[float, float]

DLIB68 = "dlib68"
MESH468 = "mesh468"
SEMANTIC = "semantic"

#: Points per scheme. The semantic scheme carries the 19 distinct points the
#: metrics consume: 6 per eye, 6 inner-lip, and the nose tip; the outer eye
#: corners are the corner members of the eye hexagons, not extra points.
POINT_COUNTS = {DLIB68: 68, MESH468: 468, SEMANTIC: 19}


def _check_finite(points) -> bool:
    isfinite = math.isfinite
    for x, y in points:
        if not (isfinite(x) and isfinite(y)):
            return False
    return True


@dataclass(frozen=True, slots=True)
class LandmarkFrame:
    """One timestamped set of 2-D facial landmarks under a declared scheme."""

    t: float
    scheme: str
    points: tuple[Point, ...]
    face_present: bool

    def __post_init__(self):
        if self.scheme not in POINT_COUNTS:
            raise ValueError(f"unknown landmark scheme {self.scheme!r}")
        if not (math.isfinite(self.t) and self.t >= 0.0):
            raise ValueError(f"timestamp must be finite and non-negative, got {self.t!r}")
        if self.face_present:
            expected = POINT_COUNTS[self.scheme]
            if len(self.points) != expected:
                raise ValueError(
                    f"scheme {self.scheme} requires {expected} points, got {len(self.points)}"
                )
            if not _check_finite(self.points):
                raise ValueError("landmark coordinates must be finite")
        elif self.points:
            raise ValueError("faceless frame must carry no points")


@dataclass(frozen=True, slots=True)
class SemanticPoints:
    """Scheme-independent named points consumed by every metric.

    Eye tuples follow the hexagon ordering described in the module docstring;
    the mouth tuple holds the inner-lip hexagon in the same ordering.
    """

    left_eye: tuple[Point, ...]
    right_eye: tuple[Point, ...]
    mouth: tuple[Point, ...]
    nose_tip: Point
    left_eye_outer_corner: Point
    right_eye_outer_corner: Point


@dataclass(frozen=True, slots=True)
class SchemeMap:
    """Maps scheme-specific point indices onto the semantic roles.

    Eye/mouth index groups and the nose tip must be pairwise disjoint. The
    two corner indices may alias eye-hexagon members (in every shipped map
    they are the outer corner members of the hexagons) but must be distinct
    from each other and from mouth/nose roles.
    """

    scheme: str
    eye_left_indices: tuple[int, ...]
    eye_right_indices: tuple[int, ...]
    mouth_indices: tuple[int, ...]
    nose_tip_index: int
    eye_corner_indices: tuple[int, int]

    def __post_init__(self):
        if self.scheme not in POINT_COUNTS:
            raise SchemeMapError(f"unknown scheme {self.scheme!r}")
        n = POINT_COUNTS[self.scheme]
        groups = (self.eye_left_indices, self.eye_right_indices, self.mouth_indices)
        for name, group in zip(("eye_left", "eye_right", "mouth"), groups):
            if len(group) != 6:
                raise SchemeMapError(f"{name}_indices must hold 6 indices")
        flat = [i for g in groups for i in g]
        flat.append(self.nose_tip_index)
        flat.extend(self.eye_corner_indices)
        for i in flat:
            if not isinstance(i, int) or not 0 <= i < n:
                raise SchemeMapError(f"index {i!r} out of range for scheme {self.scheme}")
        core = [i for g in groups for i in g] + [self.nose_tip_index]
        if len(set(core)) != len(core):
            raise SchemeMapError("eye, mouth, and nose roles must use distinct indices")
        c0, c1 = self.eye_corner_indices
        if c0 == c1:
            raise SchemeMapError("eye corner indices must be distinct")
        mouth_and_nose = set(self.mouth_indices) | {self.nose_tip_index}
        if c0 in mouth_and_nose or c1 in mouth_and_nose:
            raise SchemeMapError("eye corners cannot reuse mouth or nose indices")


#: Default map for the 68-point layout (0-based indices). Eyes are named by
#: image side: the image-left eye occupies 36..41 with its outer corner at 36,
#: the image-right eye 42..47 with its outer corner at 45. Mouth roles are the
#: inner-lip points: corners 60/64, upper pair 62/63, lower pair 66/65.
DLIB68_MAP = SchemeMap(
    scheme=DLIB68,
    eye_left_indices=(36, 37, 38, 39, 40, 41),
    eye_right_indices=(42, 43, 44, 45, 46, 47),
    mouth_indices=(60, 62, 63, 64, 65, 66),
    nose_tip_index=30,
    eye_corner_indices=(36, 45),
)

#: Default map for the 468-point face mesh, image-side naming as above.
#: The six-point eye sets and inner-lip set are the widely used aspect-ratio
#: landmark choices for this mesh; the mesh itself does not prescribe them.
MESH468_MAP = SchemeMap(
    scheme=MESH468,
    eye_left_indices=(33, 160, 158, 133, 153, 144),
    eye_right_indices=(362, 385, 387, 263, 373, 380),
    mouth_indices=(78, 81, 311, 308, 402, 178),
    nose_tip_index=1,
    eye_corner_indices=(33, 263),
)

#: Identity map for frames already in the semantic layout:
#: points 0..5 left eye, 6..11 right eye, 12..17 mouth, 18 nose tip.
SEMANTIC_MAP = SchemeMap(
    scheme=SEMANTIC,
    eye_left_indices=(0, 1, 2, 3, 4, 5),
    eye_right_indices=(6, 7, 8, 9, 10, 11),
    mouth_indices=(12, 13, 14, 15, 16, 17),
    nose_tip_index=18,
    eye_corner_indices=(0, 9),
)

_BUILTIN = {DLIB68: DLIB68_MAP, MESH468: MESH468_MAP, SEMANTIC: SEMANTIC_MAP}


def builtin_scheme_map(scheme: str) -> SchemeMap:
    """Return the shipped default map for dlib68 or mesh468.

    Semantic frames need no map (use SEMANTIC_MAP where an explicit map is
    required); asking for one is treated as a configuration mistake.
    """
    if scheme == SEMANTIC:
        raise ConfigError("semantic frames need no scheme map")
    try:
        return _BUILTIN[scheme]
    except KeyError:
        raise ConfigError(f"no builtin map for scheme {scheme!r}") from None


@lru_cache(maxsize=None)
def _selectors(scheme_map: SchemeMap):
    # itemgetter runs the index selection in C; maps are few, cache them all
    return (
        itemgetter(*scheme_map.eye_left_indices),
        itemgetter(*scheme_map.eye_right_indices),
        itemgetter(*scheme_map.mouth_indices),
        scheme_map.nose_tip_index,
        scheme_map.eye_corner_indices[0],
        scheme_map.eye_corner_indices[1],
    )


def to_semantic(frame: LandmarkFrame, scheme_map: SchemeMap | None = None) -> SemanticPoints | None:
    """Select the named semantic points out of a frame; None when no face.

    A pure selection: output coordinates are exactly input coordinates.
    """
    if scheme_map is None:
        scheme_map = _BUILTIN[frame.scheme]
    elif frame.scheme != scheme_map.scheme:
        raise ConfigError(
            f"frame scheme {frame.scheme!r} does not match map scheme {scheme_map.scheme!r}"
        )
    if not frame.face_present:
        return None
    pts = frame.points
    left_of, right_of, mouth_of, nose_i, c0, c1 = _selectors(scheme_map)
    try:
        corner_left = pts[c0]
        corner_right = pts[c1]
        if corner_left == corner_right:
            raise GeometryError(
                f"degenerate frame at t={frame.t:.3f}: eye corners coincide"
            )
        return SemanticPoints(
            left_eye=left_of(pts),
            right_eye=right_of(pts),
            mouth=mouth_of(pts),
            nose_tip=pts[nose_i],
            left_eye_outer_corner=corner_left,
            right_eye_outer_corner=corner_right,
        )
    except IndexError:
        raise SchemeMapError(
            f"map for scheme {scheme_map.scheme} indexes beyond {len(pts)} points"
        ) from None


def frame_from_semantic(sp: SemanticPoints, t: float) -> LandmarkFrame:
    """Pack semantic points into a semantic-scheme frame (inverse of to_semantic)."""
    points = sp.left_eye + sp.right_eye + sp.mouth + (sp.nose_tip,)
    return LandmarkFrame(t=t, scheme=SEMANTIC, points=points, face_present=True)
