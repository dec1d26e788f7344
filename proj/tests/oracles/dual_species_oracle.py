"""Independent dual-species oracle (numpy/scipy).

Coupled H-K Bloch equations with fixed q_K, the closed-form steady state and
response, a DOP853 lock-in (Floquet shooting, rtol 1e-11), the linearized
noise spectrum and the phase-readout sensitivity. Output is frozen into
tests/data/dual_species_oracle.json.

Run from the repository root:  python3 tests/oracles/dual_species_oracle.py
"""
import json
import numpy as np
from scipy.integrate import solve_ivp

ge = 2 * np.pi * 28e9
gH, gK = ge / 2, ge / 4
kHK = 5.4e-10


def rates(nK, nH, Gp, qK=6.0, qH=2.0, GH=40.0, Bz=50e-6):
    GHK = kHK * nK / qH
    GKH = kHK * nH / qK
    return dict(GHK=GHK, GKH=GKH, GK=Gp + GKH, GH=GH, Gp=Gp, wH=gH * Bz, wK=gK * Bz, Bz=Bz)


def PKz(r):
    return r['Gp'] * r['GH'] / (r['GK'] * r['GH'] - r['GKH'] * r['GHK'])


def closed_form(r, w, Bp):
    aK = r['GK'] - 1j * (r['wK'] - w)
    aH = r['GH'] - 1j * (r['wH'] - w)
    return 1j * gK * Bp * PKz(r) / (r['GH'] * (1 - aK / r['GKH'] * aH / r['GHK']))


def linear(r, w, Bp):
    aK = r['GK'] - 1j * (r['wK'] - w)
    aH = r['GH'] - 1j * (r['wH'] - w)
    P = PKz(r)
    gh = gH * Bp * (r['GHK'] / r['GH'] * P) / 2
    gk = gK * Bp * P / 2
    return -1j * (r['GKH'] * gh + aH * gk) / (aK * aH - r['GKH'] * r['GHK'])


def cross(B):
    return np.array([[0, -B[2], B[1]], [B[2], 0, -B[0]], [-B[1], B[0], 0]])


def lockin(r, w, Bp):
    def A(t):
        B = np.array([Bp * np.cos(w * t), 0, r['Bz']])
        M = np.zeros((6, 6))
        M[:3, :3] = gH * cross(B) - r['GH'] * np.eye(3)
        M[:3, 3:] = r['GHK'] * np.eye(3)
        M[3:, 3:] = gK * cross(B) - r['GK'] * np.eye(3)
        M[3:, :3] = r['GKH'] * np.eye(3)
        return M
    b = np.array([0, 0, 0, 0, 0, r['Gp']])
    T = 2 * np.pi / w

    def f(t, z):
        Z = z.reshape(6, 7)
        out = A(t) @ Z
        out[:, 6] += b
        return out.ravel()
    z0 = np.hstack([np.eye(6), np.zeros((6, 1))]).ravel()
    s = solve_ivp(f, [0, T], z0, method='DOP853', rtol=1e-11, atol=1e-14)
    Z = s.y[:, -1].reshape(6, 7)
    y0 = np.linalg.solve(np.eye(6) - Z[:, :6], Z[:, 6])
    N = 64
    ts = np.arange(N) * T / N
    s2 = solve_ivp(lambda t, y: A(t) @ y + b, [0, T], y0, t_eval=ts, method='DOP853', rtol=1e-11, atol=1e-14)
    return np.mean((s2.y[3] + 1j * s2.y[4]) * np.exp(-1j * w * ts))


def drift(r):
    A = np.zeros((4, 4))
    R = lambda w, G: np.array([[-G, -w], [w, -G]])
    A[:2, :2] = R(r['wH'], r['GH'])
    A[2:, 2:] = R(r['wK'], r['GK'])
    A[:2, 2:] = r['GHK'] * np.eye(2)
    A[2:, :2] = r['GKH'] * np.eye(2)
    return A


def psd(r, w, nK, nH, V=1.0, which='both'):
    A = drift(r)
    sH = 2 * r['GH'] / (nH * V)
    sK = 2 * r['GK'] / (nK * V)
    D2 = np.diag([sH * (which != 'K')] * 2 + [sK * (which != 'H')] * 2)
    G = np.linalg.inv(A - 1j * w * np.eye(4))
    C = np.array([0, 0, 1, 0])
    return 2 * np.real(C @ G @ D2 @ G.conj().T @ C)


def sensitivity(nK, nH, Gp, Bp, qK=6.0, Bz=50e-6, V=1.0):
    r0 = rates(nK, nH, Gp, qK=qK, Bz=Bz)
    w = r0['wH']
    chi = lambda B: np.angle(linear(rates(nK, nH, Gp, qK=qK, Bz=B), w, Bp))
    h = 1e-3 * r0['GH'] / gH
    slope = abs(chi(Bz + h) - chi(Bz - h)) / (2 * h)
    amp = abs(linear(r0, w, Bp))
    S = psd(r0, w, nK, nH, V)
    return np.sqrt(S) / (amp * np.sqrt(2)) / slope * np.sqrt(V) * 1e18


def cplx(z):
    return [float(np.real(z)), float(np.imag(z))]


if __name__ == '__main__':
    nK, nH, Gp = 1.2e11, 2.7e16, 1.2e7
    r = rates(nK, nH, Gp)
    out = dict(star=dict(n_K=nK, n_H=nH, Gamma_p=Gp, q_K=6.0, Gamma_HK=r['GHK'], Gamma_KH=r['GKH'],
                         Gamma_K=r['GK'], P_Kz=PKz(r)))
    pts = []
    for Bp in (0.35e-9, 0.05e-9):
        for dw in (0.0, 20.0, -20.0, 60.0):
            w = r['wH'] + dw
            pts.append(dict(B_perp=Bp, omega=w, closed_form=cplx(closed_form(r, w, Bp)),
                            linear=cplx(linear(r, w, Bp)), lockin=cplx(lockin(r, w, Bp))))
    out['response'] = pts
    out['psd_at_omega_H'] = dict(total=psd(r, r['wH'], nK, nH), hydrogen=psd(r, r['wH'], nK, nH, which='H'),
                                 potassium=psd(r, r['wH'], nK, nH, which='K'))
    out['sensitivity'] = [dict(Gamma_p=Gp, B_perp=Bp, delta_B=sensitivity(nK, nH, Gp, Bp))
                          for Bp in (0.35e-9, 0.2e-9)]
    with open('tests/data/dual_species_oracle.json', 'w') as f:
        json.dump(out, f, indent=1)
