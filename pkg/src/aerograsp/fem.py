"""FEM model of a tendon-actuated soft finger and its control optimization.

The finger is a planar mesh of constant-strain triangles with a St. Venant-
Kirchhoff plane-strain material (closed-form gradient and Hessian), actuated
by unilateral cable springs routed through via nodes: a cable stores energy
0.5 * k * max(0, L(x) - (L0 - u))^2, so it pulls only in tension and a
contraction u shortens its effective rest length.  Fingers are molded closed:
u = 0 leaves the rest shape untouched and increasing u opens the finger.

Static equilibrium x(u) = argmin_x E(u, x) is solved with a regularized
Newton method over the free nodes; dx/du comes from direct sensitivity
analysis (-Hess^-1 * d2E/dxdu); and the nested control optimization descends
O(u) = O_grasp(x(u)) + O_FOV(x(u)) with projected gradient steps.

O_grasp is the squared fingertip/target-point area, negated so that the
minimization opens the gripper; O_FOV penalizes nodes penetrating camera
frustum half-spaces through a smooth one-sided quadratic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Material",
    "FingerMesh",
    "Cable",
    "FovPlane",
    "BarycentricAnchor",
    "GraspObjectiveConfig",
    "EquilibriumResult",
    "ObjectiveEval",
    "ControlOptResult",
    "energy",
    "energy_gradient",
    "energy_hessian",
    "static_equilibrium",
    "control_mixed_partial",
    "sensitivity",
    "fov_penalty",
    "fov_penalty_derivative",
    "fingertip_position",
    "objectives",
    "optimize_control",
    "make_finger_mesh",
    "mesh_to_dict",
    "mesh_from_dict",
]


@dataclass
class Material:
    youngs_modulus: float = 5e4  # Pa, castable-foam scale
    poisson_ratio: float = 0.3

    def lame(self) -> tuple[float, float]:
        e, nu = self.youngs_modulus, self.poisson_ratio
        mu = e / (2.0 * (1.0 + nu))
        lam = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
        return mu, lam


@dataclass
class Cable:
    """Unilateral spring routed through ordered via nodes."""

    via_nodes: list
    stiffness: float
    rest_length: float

    def __post_init__(self):
        self.via_nodes = [int(i) for i in self.via_nodes]
        if len(self.via_nodes) < 2:
            raise ValueError("cable needs at least 2 via nodes")
        if self.stiffness <= 0:
            raise ValueError("cable stiffness must be positive")


@dataclass
class FingerMesh:
    """Planar triangle mesh with clamped base nodes."""

    nodes: np.ndarray  # (M, 2) rest positions
    triangles: np.ndarray  # (T, 3) vertex indices
    fixed_nodes: list
    material: Material = field(default_factory=Material)
    thickness: float = 0.02
    density: float = 0.0  # kg/m^3; > 0 enables gravity
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, -9.81]))

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float).reshape(-1, 2)
        self.triangles = np.asarray(self.triangles, dtype=int).reshape(-1, 3)
        self.fixed_nodes = sorted(int(i) for i in self.fixed_nodes)
        self.gravity = np.asarray(self.gravity, dtype=float).reshape(2)
        if not self.fixed_nodes:
            raise ValueError("fixed_nodes must be non-empty")
        if self.thickness <= 0:
            raise ValueError("thickness must be positive")
        self._rest_inv = np.empty((len(self.triangles), 2, 2))
        self._areas = np.empty(len(self.triangles))
        for e, tri in enumerate(self.triangles):
            d = np.column_stack(
                [self.nodes[tri[1]] - self.nodes[tri[0]], self.nodes[tri[2]] - self.nodes[tri[0]]]
            )
            det = np.linalg.det(d)
            if det <= 0:
                raise ValueError(f"triangle {e} is inverted or degenerate at rest")
            self._rest_inv[e] = np.linalg.inv(d)
            self._areas[e] = 0.5 * det
        free = [i for i in range(len(self.nodes)) if i not in set(self.fixed_nodes)]
        self.free_nodes = np.array(free, dtype=int)
        self.free_dofs = np.concatenate([[2 * i, 2 * i + 1] for i in free]) if free else np.array([], dtype=int)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


def path_length(x: np.ndarray, via_nodes) -> float:
    pts = x[via_nodes]
    return float(np.sum(np.linalg.norm(np.diff(pts, axis=0), axis=1)))


def _cable_stretch(cable: Cable, u: float, x: np.ndarray) -> float:
    return path_length(x, cable.via_nodes) - (cable.rest_length - u)


def _path_gradient(x: np.ndarray, via_nodes, n_nodes: int) -> np.ndarray:
    g = np.zeros(2 * n_nodes)
    for a, b in zip(via_nodes[:-1], via_nodes[1:]):
        d = x[b] - x[a]
        length = np.linalg.norm(d)
        if length < 1e-15:
            continue
        d = d / length
        g[2 * b : 2 * b + 2] += d
        g[2 * a : 2 * a + 2] -= d
    return g


def _stvk_pk1(f: np.ndarray, mu: float, lam: float) -> np.ndarray:
    e = 0.5 * (f.T @ f - np.eye(2))
    return f @ (2.0 * mu * e + lam * np.trace(e) * np.eye(2))


def _stvk_density(f: np.ndarray, mu: float, lam: float) -> float:
    e = 0.5 * (f.T @ f - np.eye(2))
    return float(mu * np.sum(e * e) + 0.5 * lam * np.trace(e) ** 2)


def _stvk_dpk1(f: np.ndarray, df: np.ndarray, mu: float, lam: float) -> np.ndarray:
    e = 0.5 * (f.T @ f - np.eye(2))
    de = 0.5 * (df.T @ f + f.T @ df)
    return df @ (2.0 * mu * e + lam * np.trace(e) * np.eye(2)) + f @ (
        2.0 * mu * de + lam * np.trace(de) * np.eye(2)
    )


def _element_dfs(bm: np.ndarray) -> list[np.ndarray]:
    """dF/d(dof) for the 6 element dofs (constant since F is linear in x)."""
    dfs = []
    for local in range(3):
        for coord in range(2):
            dds = np.zeros((2, 2))
            if local == 0:
                dds[coord, 0] = -1.0
                dds[coord, 1] = -1.0
            else:
                dds[coord, local - 1] = 1.0
            dfs.append(dds @ bm)
    return dfs


def _controls(u, n_cables: int) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if len(u) != n_cables:
        raise ValueError("one contraction per cable required")
    if np.any(u < -1e-12):
        raise ValueError("contractions must be >= 0")
    return u


def energy(mesh: FingerMesh, cables: list[Cable], u, x) -> float:
    """Total potential energy (J) of elastic triangles plus taut cables."""
    u = _controls(u, len(cables))
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    mu, lam = mesh.material.lame()
    total = 0.0
    for e, tri in enumerate(mesh.triangles):
        ds = np.column_stack([x[tri[1]] - x[tri[0]], x[tri[2]] - x[tri[0]]])
        f = ds @ mesh._rest_inv[e]
        total += _stvk_density(f, mu, lam) * mesh._areas[e] * mesh.thickness
    for cable, ui in zip(cables, u):
        s = _cable_stretch(cable, ui, x)
        if s > 0.0:
            total += 0.5 * cable.stiffness * s * s
    if mesh.density > 0.0:
        masses = np.zeros(mesh.n_nodes)
        for e, tri in enumerate(mesh.triangles):
            masses[tri] += mesh._areas[e] * mesh.thickness * mesh.density / 3.0
        total -= float(masses @ (x @ mesh.gravity))
    return total


def energy_gradient(mesh: FingerMesh, cables: list[Cable], u, x) -> tuple[float, np.ndarray]:
    """Energy and its gradient w.r.t. flattened node positions (2M,)."""
    u = _controls(u, len(cables))
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    mu, lam = mesh.material.lame()
    n = mesh.n_nodes
    grad = np.zeros(2 * n)
    total = 0.0
    for e, tri in enumerate(mesh.triangles):
        ds = np.column_stack([x[tri[1]] - x[tri[0]], x[tri[2]] - x[tri[0]]])
        bm = mesh._rest_inv[e]
        f = ds @ bm
        scale = mesh._areas[e] * mesh.thickness
        total += _stvk_density(f, mu, lam) * scale
        h = _stvk_pk1(f, mu, lam) @ bm.T * scale  # dW/dDs
        grad[2 * tri[1] : 2 * tri[1] + 2] += h[:, 0]
        grad[2 * tri[2] : 2 * tri[2] + 2] += h[:, 1]
        grad[2 * tri[0] : 2 * tri[0] + 2] -= h[:, 0] + h[:, 1]
    for cable, ui in zip(cables, u):
        s = _cable_stretch(cable, ui, x)
        if s > 0.0:
            total += 0.5 * cable.stiffness * s * s
            grad += cable.stiffness * s * _path_gradient(x, cable.via_nodes, n)
    if mesh.density > 0.0:
        masses = np.zeros(n)
        for e, tri in enumerate(mesh.triangles):
            masses[tri] += mesh._areas[e] * mesh.thickness * mesh.density / 3.0
        total -= float(masses @ (x @ mesh.gravity))
        grad -= np.repeat(masses, 2) * np.tile(mesh.gravity, n)
    return total, grad


def energy_hessian(
    mesh: FingerMesh, cables: list[Cable], u, x
) -> tuple[float, np.ndarray, np.ndarray]:
    """Energy, gradient, and analytic Hessian (2M, 2M).

    The unilateral cables contribute through their active set only; at the
    kink (zero stretch) the tensioned branch is used.
    """
    u = _controls(u, len(cables))
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    mu, lam = mesh.material.lame()
    n = mesh.n_nodes
    total, grad = energy_gradient(mesh, cables, u, x)
    hess = np.zeros((2 * n, 2 * n))
    for e, tri in enumerate(mesh.triangles):
        ds = np.column_stack([x[tri[1]] - x[tri[0]], x[tri[2]] - x[tri[0]]])
        bm = mesh._rest_inv[e]
        f = ds @ bm
        scale = mesh._areas[e] * mesh.thickness
        dfs = _element_dfs(bm)
        dofs = [2 * tri[0], 2 * tri[0] + 1, 2 * tri[1], 2 * tri[1] + 1, 2 * tri[2], 2 * tri[2] + 1]
        local = np.empty((6, 6))
        dps = [_stvk_dpk1(f, dfs[j], mu, lam) for j in range(6)]
        for a in range(6):
            for b in range(a, 6):
                val = np.sum(dfs[a] * dps[b]) * scale
                local[a, b] = val
                local[b, a] = val
        for a in range(6):
            for b in range(6):
                hess[dofs[a], dofs[b]] += local[a, b]
    for cable, ui in zip(cables, u):
        s = _cable_stretch(cable, ui, x)
        # Kink (zero stretch) takes the tensioned branch: the one-sided
        # curvature that a contraction increase would engage.
        if s >= 0.0:
            g_len = _path_gradient(x, cable.via_nodes, n)
            hess += cable.stiffness * np.outer(g_len, g_len)
            for a, b in zip(cable.via_nodes[:-1], cable.via_nodes[1:]):
                d = x[b] - x[a]
                length = np.linalg.norm(d)
                if length < 1e-15:
                    continue
                d = d / length
                block = cable.stiffness * s * (np.eye(2) - np.outer(d, d)) / length
                ia, ib = 2 * a, 2 * b
                hess[ib : ib + 2, ib : ib + 2] += block
                hess[ia : ia + 2, ia : ia + 2] += block
                hess[ia : ia + 2, ib : ib + 2] -= block
                hess[ib : ib + 2, ia : ia + 2] -= block
    return total, grad, hess


@dataclass
class EquilibriumResult:
    x: np.ndarray
    converged: bool
    residual: float
    iterations: int


def static_equilibrium(
    mesh: FingerMesh,
    cables: list[Cable],
    u,
    x_init: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iterations: int = 200,
) -> EquilibriumResult:
    """Newton with backtracking line search on E(u, .) over free nodes.

    Indefinite Hessians are shifted by their smallest eigenvalue before the
    solve.  Convergence is the infinity norm of the free-node gradient.
    """
    u = _controls(u, len(cables))
    x = mesh.nodes.copy() if x_init is None else np.asarray(x_init, dtype=float).reshape(-1, 2).copy()
    free = mesh.free_dofs
    if len(free) == 0:
        return EquilibriumResult(x, True, 0.0, 0)
    e_val, grad = energy_gradient(mesh, cables, u, x)
    res = float(np.max(np.abs(grad[free])))
    for it in range(1, max_iterations + 1):
        if res < tol:
            return EquilibriumResult(x, True, res, it - 1)
        _, _, hess = energy_hessian(mesh, cables, u, x)
        h_ff = hess[np.ix_(free, free)]
        eig_min = float(np.linalg.eigvalsh(h_ff)[0])
        floor = 1e-8 * max(1.0, float(np.max(np.abs(h_ff))))
        if eig_min < floor:
            h_ff = h_ff + (floor - eig_min) * np.eye(len(free))
        try:
            step_free = np.linalg.solve(h_ff, -grad[free])
        except np.linalg.LinAlgError:
            return EquilibriumResult(x, False, res, it)
        slope = float(grad[free] @ step_free)  # < 0 for the regularized step
        alpha = 1.0
        improved = False
        while alpha > 1e-12:
            x_try = x.copy()
            flat = x_try.reshape(-1)
            flat[free] += alpha * step_free
            e_try = energy(mesh, cables, u, x_try)
            if e_try <= e_val + 1e-4 * alpha * slope:
                x = x_try
                e_val = e_try
                improved = True
                break
            alpha *= 0.5
        if not improved:
            return EquilibriumResult(x, res < tol, res, it)
        _, grad = energy_gradient(mesh, cables, u, x)
        res = float(np.max(np.abs(grad[free])))
    return EquilibriumResult(x, res < tol, res, max_iterations)


def control_mixed_partial(mesh: FingerMesh, cables: list[Cable], u, x) -> np.ndarray:
    """d2E/dx du, shape (2M, n_cables); zero columns for slack cables.

    A cable exactly at zero stretch (the passively closed rest state with
    u = 0) uses the tensioned branch, giving the one-sided derivative for
    increasing contraction.
    """
    u = _controls(u, len(cables))
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    out = np.zeros((2 * mesh.n_nodes, len(cables)))
    for c, (cable, ui) in enumerate(zip(cables, u)):
        s = _cable_stretch(cable, ui, x)
        if s >= 0.0:
            out[:, c] = cable.stiffness * _path_gradient(x, cable.via_nodes, mesh.n_nodes)
    return out


def sensitivity(mesh: FingerMesh, cables: list[Cable], u, x_star) -> np.ndarray:
    """dx/du at a converged equilibrium: -Hess^-1 d2E/dxdu on free dofs.

    Returns the full (2M, n_cables) matrix with zero rows at fixed dofs.
    """
    u = _controls(u, len(cables))
    x_star = np.asarray(x_star, dtype=float).reshape(-1, 2)
    _, _, hess = energy_hessian(mesh, cables, u, x_star)
    free = mesh.free_dofs
    h_ff = hess[np.ix_(free, free)]
    eig_min = float(np.linalg.eigvalsh(h_ff)[0])
    floor = 1e-10 * max(1.0, float(np.max(np.abs(h_ff))))
    if eig_min < floor:
        h_ff = h_ff + (floor - eig_min) * np.eye(len(free))
    mixed = control_mixed_partial(mesh, cables, u, x_star)
    try:
        sol = np.linalg.solve(h_ff, mixed[free])
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("singular equilibrium Hessian in sensitivity") from exc
    full = np.zeros((2 * mesh.n_nodes, len(cables)))
    full[free] = -sol
    return full


# -- objectives -------------------------------------------------------------


@dataclass
class FovPlane:
    """Half-space boundary of a camera frustum: point and unit normal."""

    point: np.ndarray
    normal: np.ndarray

    def __post_init__(self):
        self.point = np.asarray(self.point, dtype=float).reshape(3)
        self.normal = np.asarray(self.normal, dtype=float).reshape(3)
        if abs(np.linalg.norm(self.normal) - 1.0) > 1e-7:
            raise ValueError("plane normal must be unit length")


@dataclass
class BarycentricAnchor:
    element: int
    weights: np.ndarray

    def __post_init__(self):
        self.element = int(self.element)
        self.weights = np.asarray(self.weights, dtype=float).reshape(3)
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("barycentric weights must sum to 1")


@dataclass
class GraspObjectiveConfig:
    target_point: np.ndarray
    anchor1: BarycentricAnchor
    anchor2: BarycentricAnchor
    fov_planes: list = field(default_factory=list)
    eps: float = 0.005
    weight_grasp: float = 1.0
    weight_fov: float = 1.0

    def __post_init__(self):
        self.target_point = np.asarray(self.target_point, dtype=float).reshape(3)
        if self.eps <= 0:
            raise ValueError("eps must be positive")


def fov_penalty(z: float, eps: float) -> float:
    """Smooth one-sided quadratic on the penetration depth."""
    if z > eps:
        return z * z - eps * z + eps * eps / 3.0
    if z > 0.0:
        return z ** 3 / (3.0 * eps)
    return 0.0


def fov_penalty_derivative(z: float, eps: float) -> float:
    if z > eps:
        return 2.0 * z - eps
    if z > 0.0:
        return z * z / eps
    return 0.0


def fingertip_position(x: np.ndarray, mesh: FingerMesh, anchor: BarycentricAnchor) -> np.ndarray:
    """Anchor position embedded in 3D with z = 0."""
    tri = mesh.triangles[anchor.element]
    p2 = anchor.weights @ x[tri]
    return np.array([p2[0], p2[1], 0.0])


@dataclass
class ObjectiveEval:
    grasp: float
    fov: float
    total: float
    grad_x: np.ndarray


def objectives(x, mesh: FingerMesh, cfg: GraspObjectiveConfig) -> ObjectiveEval:
    """Grasp-area and field-of-view objectives with analytic x-gradients."""
    x = np.asarray(x, dtype=float).reshape(-1, 2)
    n = mesh.n_nodes
    grad = np.zeros(2 * n)

    y1 = fingertip_position(x, mesh, cfg.anchor1)
    y2 = fingertip_position(x, mesh, cfg.anchor2)
    s = cfg.target_point
    d1 = s - y1
    d2 = s - y2
    c = np.cross(d1, d2)
    o_grasp = -cfg.weight_grasp * float(c @ c)
    g_y1 = -cfg.weight_grasp * 2.0 * np.cross(c, d2)
    g_y2 = -cfg.weight_grasp * 2.0 * np.cross(d1, c)
    for anchor, g_y in ((cfg.anchor1, g_y1), (cfg.anchor2, g_y2)):
        tri = mesh.triangles[anchor.element]
        for local, node in enumerate(tri):
            grad[2 * node : 2 * node + 2] += anchor.weights[local] * g_y[:2]

    o_fov = 0.0
    for plane in cfg.fov_planes:
        p2 = plane.point[:2]
        n2 = plane.normal[:2]
        pz = plane.point[2] * plane.normal[2]
        for i in range(n):
            z = float((p2 - x[i]) @ n2) + pz
            o_fov += cfg.weight_fov * fov_penalty(z, cfg.eps)
            dp = fov_penalty_derivative(z, cfg.eps)
            if dp != 0.0:
                grad[2 * i : 2 * i + 2] += -cfg.weight_fov * dp * n2
    return ObjectiveEval(o_grasp, o_fov, o_grasp + o_fov, grad)


@dataclass
class ControlOptResult:
    u: np.ndarray
    x: np.ndarray
    objective: float
    converged: bool
    history: list


def optimize_control(
    mesh: FingerMesh,
    cables: list[Cable],
    cfg: GraspObjectiveConfig,
    u_init,
    u_max,
    max_iterations: int = 500,
    gtol: float = 1e-6,
) -> ControlOptResult:
    """Projected gradient descent on O(u) through the equilibrium map.

    The chain rule runs through ``sensitivity``; contractions are boxed to
    [0, min(u_max, rest_length)].  The objective is non-increasing across
    accepted steps; a line-search failure returns the best iterate flagged
    not converged.
    """
    u = np.atleast_1d(np.asarray(u_init, dtype=float)).copy()
    u_hi = np.minimum(
        np.broadcast_to(np.atleast_1d(np.asarray(u_max, dtype=float)), u.shape),
        np.array([c.rest_length for c in cables]),
    )
    u = np.clip(u, 0.0, u_hi)

    eq = static_equilibrium(mesh, cables, u)
    x = eq.x
    obj = objectives(x, mesh, cfg)
    value = obj.total
    history = [value]
    step_scale = 1.0
    for _ in range(max_iterations):
        dxdu = sensitivity(mesh, cables, u, x)
        g = dxdu.T @ obj.grad_x
        proj_grad = u - np.clip(u - g, 0.0, u_hi)
        if float(np.linalg.norm(proj_grad)) < gtol:
            return ControlOptResult(u, x, value, True, history)
        alpha = step_scale
        accepted = False
        for _ in range(40):
            u_try = np.clip(u - alpha * g, 0.0, u_hi)
            if np.array_equal(u_try, u):
                alpha *= 0.5
                continue
            eq_try = static_equilibrium(mesh, cables, u_try, x_init=x)
            if not eq_try.converged:
                alpha *= 0.5
                continue
            obj_try = objectives(eq_try.x, mesh, cfg)
            if obj_try.total < value - 1e-12:
                u, x = u_try, eq_try.x
                obj, value = obj_try, obj_try.total
                history.append(value)
                step_scale = min(alpha * 2.0, 1e3)
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            return ControlOptResult(u, x, value, False, history)
    return ControlOptResult(u, x, value, False, history)


# -- reference geometry and serialization ------------------------------------


def make_finger_mesh(
    arc_radius: float = 0.06,
    span_deg: float = 150.0,
    width: float = 0.016,
    segments: int = 10,
    material: Material | None = None,
    thickness: float = 0.02,
    cable_stiffness: float = 200.0,
    mirror: bool = False,
    origin=(0.0, 0.0),
) -> tuple[FingerMesh, Cable]:
    """Molded circular-arc finger strip with a tendon along the outer edge.

    The strip curls from its clamped base through ``span_deg``; the cable via
    nodes run base-to-tip on the convex (outer-radius) edge, so contraction
    straightens the finger.  ``mirror`` flips the bending direction for
    building opposed finger pairs.
    """
    if segments < 1:
        raise ValueError("segments must be >= 1")
    r_in = arc_radius - width / 2.0
    r_out = arc_radius + width / 2.0
    if r_in <= 0:
        raise ValueError("width too large for arc radius")
    span = np.deg2rad(span_deg)
    angles = -np.pi / 2.0 + np.linspace(0.0, span, segments + 1)
    nodes = []
    for a in angles:
        c, s = np.cos(a), np.sin(a)
        sign = -1.0 if mirror else 1.0
        nodes.append([origin[0] + sign * r_in * c, origin[1] + r_in * s])
        nodes.append([origin[0] + sign * r_out * c, origin[1] + r_out * s])
    nodes = np.array(nodes)
    triangles = []
    for i in range(segments):
        a, b = 2 * i, 2 * i + 1
        c, d = 2 * i + 2, 2 * i + 3
        if mirror:
            triangles.append([a, c, b])
            triangles.append([b, c, d])
        else:
            triangles.append([a, b, c])
            triangles.append([b, d, c])
    mesh = FingerMesh(
        nodes=nodes,
        triangles=np.array(triangles),
        fixed_nodes=[0, 1],
        material=material or Material(),
        thickness=thickness,
    )
    via = [2 * i + 1 for i in range(segments + 1)]
    cable = Cable(
        via_nodes=via,
        stiffness=cable_stiffness,
        rest_length=path_length(mesh.nodes, via),
    )
    return mesh, cable


def mesh_to_dict(mesh: FingerMesh, cables: list[Cable]) -> dict:
    return {
        "nodes": mesh.nodes.tolist(),
        "triangles": mesh.triangles.tolist(),
        "fixed_nodes": list(mesh.fixed_nodes),
        "material": {
            "youngs_modulus": mesh.material.youngs_modulus,
            "poisson_ratio": mesh.material.poisson_ratio,
        },
        "thickness": mesh.thickness,
        "cables": [
            {
                "via_nodes": c.via_nodes,
                "stiffness": c.stiffness,
                "rest_length": c.rest_length,
            }
            for c in cables
        ],
    }


def mesh_from_dict(data: dict) -> tuple[FingerMesh, list[Cable]]:
    mesh = FingerMesh(
        nodes=np.array(data["nodes"], dtype=float),
        triangles=np.array(data["triangles"], dtype=int),
        fixed_nodes=data["fixed_nodes"],
        material=Material(**data.get("material", {})),
        thickness=data.get("thickness", 0.02),
    )
    cables = []
    for c in data.get("cables", []):
        rest = c.get("rest_length")
        if rest is None:
            rest = path_length(mesh.nodes, [int(i) for i in c["via_nodes"]])
        cables.append(Cable(c["via_nodes"], c["stiffness"], rest))
    return mesh, cables
