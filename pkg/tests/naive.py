"""Loop-over-definition reference implementations used as test oracles.

Deliberately slow and index-by-index; they share no code with the package.
"""

import numpy as np


def up(F, fx, fy):
    K, X, Y = F.shape
    out = np.zeros((K, X * fx, Y * fy))
    for k in range(K):
        for x in range(X * fx):
            for y in range(Y * fy):
                out[k, x, y] = F[k, x // fx, y // fy]
    return out


def blur(F):
    K, X, Y = F.shape
    out = np.zeros_like(F, dtype=float)
    for k in range(K):
        for x in range(X):
            for y in range(Y):
                s = 0.0
                for i in (-1, 0, 1):
                    for j in (-1, 0, 1):
                        if 0 <= x + i < X and 0 <= y + j < Y:
                            s += F[k, x + i, y + j]
                out[k, x, y] = s / 9.0
    return out


def shift(F, dx, dy):
    K, X, Y = F.shape
    out = np.zeros_like(F, dtype=float)
    for k in range(K):
        for x in range(X):
            for y in range(Y):
                if 0 <= x + dx < X and 0 <= y + dy < Y:
                    out[k, x, y] = F[k, x + dx, y + dy]
    return out


def gram(F, s=0.0):
    K, X, Y = F.shape
    G = np.zeros((K, K))
    for i in range(K):
        for j in range(K):
            for x in range(X):
                for y in range(Y):
                    G[i, j] += (F[i, x, y] + s) * (F[j, x, y] + s)
    return G


def _on_grid(Fl, Fk, blur_count):
    V = up(Fk, Fl.shape[1] // Fk.shape[1], Fl.shape[2] // Fk.shape[2])
    for _ in range(blur_count):
        V = blur(V)
    return V


def interlayer(Fl, Fk, blur_count=0):
    V = _on_grid(Fl, Fk, blur_count)
    Kl, X, Y = Fl.shape
    G = np.zeros((Kl, Fk.shape[0]))
    for i in range(Kl):
        for j in range(Fk.shape[0]):
            for x in range(X):
                for y in range(Y):
                    G[i, j] += Fl[i, x, y] * V[j, x, y]
    return G


def adjacent(Fl, Fk, blur_count=0):
    V = _on_grid(Fl, Fk, blur_count)
    Kl, X, Y = Fl.shape
    out = np.zeros((3, 3, Kl, Fk.shape[0]))
    for a, dx in enumerate((-1, 0, 1)):
        for b, dy in enumerate((-1, 0, 1)):
            for i in range(Kl):
                for j in range(Fk.shape[0]):
                    for x in range(X):
                        for y in range(Y):
                            if 0 <= x + dx < X and 0 <= y + dy < Y:
                                out[a, b, i, j] += Fl[i, x, y] * V[j, x + dx, y + dy]
    return out


def amplified(F, p):
    return gram(F ** p)


def content_aware(Fl, Fc):
    Kl, X, Y = Fl.shape
    Kc = Fc.shape[0]
    out = np.zeros((Kc, Kl, Kl))
    for k in range(Kc):
        for i in range(Kl):
            for j in range(Kl):
                for x in range(X):
                    for y in range(Y):
                        out[k, i, j] += Fl[i, x, y] * Fl[j, x, y] * Fc[k, x, y]
    return out


def cube(F):
    K, X, Y = F.shape
    out = np.zeros((K, K, K))
    for k in range(K):
        for i in range(K):
            for j in range(K):
                for x in range(X):
                    for y in range(Y):
                        out[k, i, j] += F[i, x, y] * F[j, x, y] * F[k, x, y]
    return out


def conv3x3(F, kernel, bias):
    C, X, Y = F.shape
    O = kernel.shape[0]
    out = np.zeros((O, X, Y))
    for o in range(O):
        for x in range(X):
            for y in range(Y):
                s = bias[o]
                for c in range(C):
                    for i in range(3):
                        for j in range(3):
                            u, v = x + i - 1, y + j - 1
                            if 0 <= u < X and 0 <= v < Y:
                                s += kernel[o, c, i, j] * F[c, u, v]
                out[o, x, y] = s
    return out
