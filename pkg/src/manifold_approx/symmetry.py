"""Crystallographic point groups as explicit lists of rotation matrices."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .exceptions import InvalidGroup

GROUP_NAMES = ("C1", "C2", "C3", "C4", "C6", "D2", "D3", "D4", "D6", "T", "O")


def axis_angle_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues' formula for a rotation by ``angle`` about ``axis``."""
    a = np.asarray(axis, dtype=float)
    a = a / np.linalg.norm(a)
    K = np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def _close(generators, max_order: int = 48) -> np.ndarray:
    elems = [np.eye(3)]
    frontier = [np.eye(3)]
    while frontier:
        new = []
        for g in frontier:
            for h in generators:
                p = g @ h
                p[np.abs(p) < 1e-15] = 0.0
                if not any(np.allclose(p, e, atol=1e-9) for e in elems):
                    elems.append(p)
                    new.append(p)
        frontier = new
        if len(elems) > max_order:
            raise InvalidGroup("generators do not span a finite point group")
    return np.array(elems)


def validate_group(mats) -> np.ndarray:
    """Check that ``mats`` are rotations closed under products and inverses."""
    G = np.asarray(mats, dtype=float).reshape(-1, 3, 3)
    for g in G:
        if not np.allclose(g.T @ g, np.eye(3), atol=1e-9) or np.linalg.det(g) < 0:
            raise InvalidGroup("group element is not a rotation")

    def member(p):
        return np.any(np.all(np.abs(G - p).reshape(len(G), -1) < 1e-9, axis=1))

    if not member(np.eye(3)):
        raise InvalidGroup("group lacks the identity")
    for g in G:
        if not member(g.T):
            raise InvalidGroup("group is not closed under inverses")
        for h in G:
            if not member(g @ h):
                raise InvalidGroup("group is not closed under multiplication")
    return G


@lru_cache(maxsize=None)
def _named(name: str) -> np.ndarray:
    z = (0.0, 0.0, 1.0)
    if name[0] == "C":
        n = int(name[1:])
        return _close([axis_angle_matrix(z, 2 * np.pi / n)])
    if name[0] == "D":
        n = int(name[1:])
        return _close([axis_angle_matrix(z, 2 * np.pi / n), axis_angle_matrix((1, 0, 0), np.pi)])
    if name == "T":
        return _close([axis_angle_matrix((1, 1, 1), 2 * np.pi / 3), axis_angle_matrix(z, np.pi)])
    if name == "O":
        return _close([axis_angle_matrix(z, np.pi / 2), axis_angle_matrix((1, 1, 1), 2 * np.pi / 3)])
    raise InvalidGroup(f"unknown point group {name!r}; choose from {', '.join(GROUP_NAMES)}")


def symmetry_group(name: str) -> np.ndarray:
    """Rotation matrices of the named point group, shape ``(|S|, 3, 3)``.

    >>> len(symmetry_group("O"))
    24
    """
    G = _named(name.upper())
    G.setflags(write=False)
    return G


def min_symmetry_angle(G) -> float:
    """Smallest rotation angle among the non-identity elements (``inf`` for C1)."""
    G = np.asarray(G)
    angles = [np.arccos(np.clip((np.trace(g) - 1) / 2, -1, 1)) for g in G]
    nonzero = [a for a in angles if a > 1e-9]
    return min(nonzero) if nonzero else np.inf
