"""
原始-对偶路径跟踪内点法（不可行起点）

- 搜索方向：Nesterov-Todd 对称化缩放，由两侧 Cholesky 因子乘积的 SVD 得到
- Mehrotra 预测-校正，σ = (μ_aff/μ)³
- 约束行按范数均衡；自由变量通过 F 的列主元 QR 在零空间中消去，
  Schur 系统只在 F′ 的零空间上组装，对角均衡后做 Cholesky，失败时逐级加正则并迭代精化
- 原始步长与对偶步长分别计算，二者相差悬殊时取公共步长；
  新迭代点失去正定性时按比例回退步长重试
- 未达到最优时返回迭代过程中指标最好的点
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from ...utils.logger import LOG_TAG, logger
from .problem import SdpProblem, SdpResiduals, SdpSolution, SdpStatus, SolverSettings

# 不可行性判定（射线比值）阈值
INFEASIBILITY_TOL = 1e-8
# 迭代点范数超过该值视为发散
DIVERGENCE_NORM = 1e15
# 接近最优：各项指标都在容差的该倍数以内
NEAR_OPTIMAL_FACTOR = 1e3
# 已接近最优后，连续这么多步最差指标没有减半即视为停滞
STALL_WINDOW = 15
# F 的列主元 QR 中，相对首个对角元低于该值的列视为线性相关
RANK_TOL = 1e-12
# 自由变量目标落在 range(F′) 之外的相对容差
FREE_OBJECTIVE_TOL = 1e-9
# 单位对角化后的 Schur 矩阵 Cholesky 失败时依次尝试的对角正则
SCHUR_SHIFTS = (0.0, 1e-14, 1e-12, 1e-10, 1e-8, 1e-6)
REFINEMENT_STEPS = 2
BACKOFF_FACTOR = 0.7
BACKOFF_ATTEMPTS = 30
# 较小步长低于较大步长的该比例时，两侧取公共步长
COMBINED_STEP_RATIO = 0.1


class _NumericalTrouble(Exception):
    pass


@dataclass
class _Block:
    order: int
    rows: np.ndarray  # 涉及本块的约束下标
    A: np.ndarray  # (len(rows), n, n) 对称
    C: np.ndarray

    @property
    def A_flat(self) -> np.ndarray:
        return self.A.reshape(self.A.shape[0], -1)


def _row_scales(problem: SdpProblem) -> np.ndarray:
    """每条约束行 (A_r, F_r) 的 Frobenius 范数的倒数"""
    scales = np.ones(problem.constraint_count)
    for r, constraint in enumerate(problem.constraints):
        total = sum(
            value * value if i == j else 2.0 * value * value
            for _, i, j, value in constraint.block_entries
        )
        total += sum(value * value for _, value in constraint.free_entries)
        if total > 0:
            scales[r] = 1.0 / math.sqrt(total)
    return scales


class _DenseOperator:
    """按块存储的稠密约束算子 𝒜 及其伴随（行已乘以 row_scale）"""

    def __init__(self, problem: SdpProblem, row_scale: np.ndarray):
        self.m = problem.constraint_count
        self.nf = problem.free_count
        self.b = problem.rhs * row_scale
        self.cf = problem.objective_free_vector()
        self.F = np.zeros((self.m, self.nf))

        per_block: list[dict[int, list[tuple[int, int, float]]]] = [
            {} for _ in problem.block_orders
        ]
        for r, constraint in enumerate(problem.constraints):
            scale = row_scale[r]
            for block, i, j, value in constraint.block_entries:
                per_block[block].setdefault(r, []).append((i, j, value * scale))
            for index, value in constraint.free_entries:
                self.F[r, index] += value * scale

        objectives = problem.objective_matrices()
        self.blocks: list[_Block] = []
        for order, entries, C in zip(problem.block_orders, per_block, objectives):
            rows = np.array(sorted(entries), dtype=np.int64)
            A = np.zeros((rows.size, order, order))
            for position, r in enumerate(rows):
                for i, j, value in entries[int(r)]:
                    A[position, i, j] += value
                    if i != j:
                        A[position, j, i] += value
            self.blocks.append(_Block(order, rows, A, C))

    def apply(self, X: list[np.ndarray]) -> np.ndarray:
        out = np.zeros(self.m)
        for block, Xj in zip(self.blocks, X):
            if block.rows.size:
                out[block.rows] += block.A_flat @ Xj.ravel()
        return out

    def adjoint(self, y: np.ndarray) -> list[np.ndarray]:
        result = []
        for block in self.blocks:
            if block.rows.size:
                result.append(np.tensordot(y[block.rows], block.A, axes=(0, 0)))
            else:
                result.append(np.zeros((block.order, block.order)))
        return result

    def schur(self, W: list[np.ndarray]) -> np.ndarray:
        """M_rs = Σ_j ⟨A_rj, W_j A_sj W_j⟩"""
        M = np.zeros((self.m, self.m))
        for block, Wj in zip(self.blocks, W):
            if not block.rows.size:
                continue
            scaled = np.matmul(np.matmul(Wj, block.A), Wj)
            contribution = block.A_flat @ scaled.reshape(scaled.shape[0], -1).T
            M[np.ix_(block.rows, block.rows)] += contribution
        return 0.5 * (M + M.T)


class _FreeElimination:
    """
    自由变量的零空间消元：F·P = Q·R（列主元 QR），Q = [Q1 Q2]
    对偶侧 y = y0 + Q2·u 恒满足 F′y = c_f；原始侧 x_f 取给定 X 时的最小二乘值，
    于是原始残差 b − 𝒜(X) − F·x_f 恰为 Q2·Q2′(b − 𝒜(X))
    """

    def __init__(self, F: np.ndarray, cf: np.ndarray):
        self.m, self.nf = F.shape
        rank = 0
        if self.m and self.nf:
            Q, R, pivots = linalg.qr(F, pivoting=True)
            diagonal = np.abs(np.diag(R))
            if diagonal[0] > 0:
                rank = int(np.sum(diagonal > RANK_TOL * diagonal[0]))
        else:
            Q, R, pivots = np.eye(self.m), np.zeros((self.m, self.nf)), np.arange(self.nf)
        self.rank = rank
        self.Q1 = Q[:, :rank]
        self.Q2 = Q[:, rank:] if self.nf else None
        self.R11 = R[:rank, :rank]
        self.basic = pivots[:rank]
        if rank:
            self.y0 = self.Q1 @ linalg.solve_triangular(self.R11, cf[self.basic], trans="T")
        else:
            self.y0 = np.zeros(self.m)
        self.objective_defect = float(np.linalg.norm(cf - F.T @ self.y0))
        if rank < self.nf:
            logger.debug(f"{LOG_TAG} 自由变量矩阵秩亏: 秩 {rank} < 列数 {self.nf}")

    @property
    def reduced_count(self) -> int:
        return self.m if self.Q2 is None else self.Q2.shape[1]

    def reduce(self, vector: np.ndarray) -> np.ndarray:
        return vector if self.Q2 is None else self.Q2.T @ vector

    def expand(self, u: np.ndarray) -> np.ndarray:
        return u if self.Q2 is None else self.Q2 @ u

    def reduce_matrix(self, M: np.ndarray) -> np.ndarray:
        if self.Q2 is None:
            return M
        reduced = self.Q2.T @ M @ self.Q2
        return 0.5 * (reduced + reduced.T)

    def free_values(self, residual: np.ndarray) -> np.ndarray:
        """min ‖residual − F·x_f‖ 的解（非基列取 0）"""
        xf = np.zeros(self.nf)
        if self.rank:
            xf[self.basic] = linalg.solve_triangular(self.R11, self.Q1.T @ residual)
        return xf


class _SchurSolver:
    """零空间上的 Schur 系统 M̃·du = h：对角均衡、Cholesky（必要时加正则）、迭代精化"""

    def __init__(self, M: np.ndarray):
        self.M = M
        self.shift = 0.0
        self.factor = None
        n = M.shape[0]
        if n == 0:
            return
        if not np.all(np.isfinite(M)):
            raise _NumericalTrouble("Schur 矩阵出现非有限值")
        diagonal = np.diag(M).copy()
        diagonal[diagonal <= 0] = 1.0
        self.d = 1.0 / np.sqrt(diagonal)
        scaled = M * self.d[:, None] * self.d[None, :]
        for shift in SCHUR_SHIFTS:
            try:
                self.factor = linalg.cho_factor(scaled + shift * np.eye(n), lower=True)
            except linalg.LinAlgError:
                continue
            self.shift = shift
            break
        else:
            raise _NumericalTrouble("Schur 矩阵加正则后仍无法 Cholesky 分解")
        if self.shift:
            logger.debug(f"{LOG_TAG} Schur 矩阵加对角正则 {self.shift:g}")

    def _solve_once(self, h: np.ndarray) -> np.ndarray:
        return self.d * linalg.cho_solve(self.factor, self.d * h)

    def solve(self, h: np.ndarray) -> np.ndarray:
        if self.factor is None:
            return np.zeros(0)
        du = self._solve_once(h)
        for _ in range(REFINEMENT_STEPS):
            du = du + self._solve_once(h - self.M @ du)
        if not np.all(np.isfinite(du)):
            raise _NumericalTrouble("Schur 系统回代出现非有限值")
        return du


@dataclass
class _Scaling:
    """单个块的 NT 缩放：W = GG′，G′ZG = G⁻¹XG⁻ᵀ = diag(v)"""

    G: np.ndarray
    G_inv: np.ndarray
    W: np.ndarray
    v: np.ndarray
    chol_X: np.ndarray
    chol_Z: np.ndarray


@dataclass
class _Iterate:
    X: list[np.ndarray]
    Z: list[np.ndarray]
    u: np.ndarray  # 零空间中的对偶坐标，y = y0 + Q2·u
    chol_X: list[np.ndarray]
    chol_Z: list[np.ndarray]


def _symmetric(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def _cholesky(matrix: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(matrix)):
        raise _NumericalTrouble("矩阵出现非有限值")
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as e:
        raise _NumericalTrouble(f"矩阵失去正定性: {e}") from e


def _nt_scaling(chol_X: np.ndarray, chol_Z: np.ndarray) -> _Scaling:
    """L_Z′L_X = UΣV′ ⇒ G = L_X·V·Σ^{-1/2}，G⁻¹ = Σ^{-1/2}·U′·L_Z′"""
    try:
        U, sv, Vt = linalg.svd(chol_Z.T @ chol_X)
    except (linalg.LinAlgError, ValueError) as e:
        raise _NumericalTrouble(f"NT 缩放 SVD 失败: {e}") from e
    if not np.all(sv > 0):
        raise _NumericalTrouble("NT 缩放奇异值非正")
    root = np.sqrt(sv)
    G = (chol_X @ Vt.T) / root
    G_inv = (U.T @ chol_Z.T) / root[:, None]
    return _Scaling(G, G_inv, G @ G.T, sv, chol_X, chol_Z)


def _max_step(chol: np.ndarray, direction: np.ndarray) -> float:
    """最大 α 使 LL′ + α·D ⪰ 0"""
    half = linalg.solve_triangular(chol, direction, lower=True)
    scaled = linalg.solve_triangular(chol, half.T, lower=True)
    smallest = np.linalg.eigvalsh(_symmetric(scaled))[0]
    if smallest >= 0:
        return math.inf
    return -1.0 / smallest


def _advance(
    blocks: list[np.ndarray], direction: list[np.ndarray], alpha: float, side: str
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """沿方向前进 alpha；新点 Cholesky 失败则按比例回退重试"""
    for attempt in range(BACKOFF_ATTEMPTS):
        candidate = [_symmetric(B + alpha * D) for B, D in zip(blocks, direction)]
        try:
            factors = [_cholesky(c) for c in candidate]
        except _NumericalTrouble:
            alpha *= BACKOFF_FACTOR
            continue
        if attempt:
            logger.debug(f"{LOG_TAG} {side}步长回退 {attempt} 次至 {alpha:.3e}")
        return alpha, candidate, factors
    raise _NumericalTrouble(f"{side}步长回退 {BACKOFF_ATTEMPTS} 次后仍失去正定性")


def _inner(a: list[np.ndarray], b: list[np.ndarray]) -> float:
    return float(sum(np.sum(x * y) for x, y in zip(a, b)))


def _fro(blocks: list[np.ndarray]) -> float:
    return math.sqrt(sum(float(np.sum(x * x)) for x in blocks))


class InteriorPointSolver:
    """单个 SDP 实例的求解器（单线程，确定性）"""

    def __init__(self, problem: SdpProblem, settings: SolverSettings | None = None):
        self.problem = problem
        self.settings = settings or SolverSettings()
        self.row_scale = _row_scales(problem)
        self.op = _DenseOperator(problem, self.row_scale)
        self.free = _FreeElimination(self.op.F, self.op.cf)
        self.N = sum(problem.block_orders)
        self.C = [block.C for block in self.op.blocks]
        # 消去自由变量后的目标 C − 𝒜*(y0)
        self.C_reduced = [C - A for C, A in zip(self.C, self.op.adjoint(self.free.y0))]
        self.b_reduced = self.free.reduce(self.op.b)
        self.c_norm = _fro(self.C) + float(np.linalg.norm(self.op.cf))
        self.history: list[dict[str, float]] = []

    # ------------------------------------------------------------------ 起点

    def _initial_point(self) -> _Iterate:
        scale = self.settings.initial_point_scale
        b = self.op.b
        X, Z, chol_X, chol_Z = [], [], [], []
        for block, C in zip(self.op.blocks, self.C_reduced):
            n = block.order
            if block.rows.size:
                row_norms = np.linalg.norm(block.A_flat, axis=1)
                xi = max(10.0, math.sqrt(n), n * float(np.max((1 + np.abs(b[block.rows])) / (1 + row_norms))))
                eta = max(10.0, math.sqrt(n), float(row_norms.max()), float(np.linalg.norm(C)))
            else:
                xi = max(10.0, math.sqrt(n))
                eta = max(10.0, math.sqrt(n), float(np.linalg.norm(C)))
            X.append(scale * xi * np.eye(n))
            Z.append(scale * eta * np.eye(n))
            chol_X.append(math.sqrt(scale * xi) * np.eye(n))
            chol_Z.append(math.sqrt(scale * eta) * np.eye(n))
        return _Iterate(X, Z, np.zeros(self.free.reduced_count), chol_X, chol_Z)

    # ------------------------------------------------------------------ 度量

    def _measures(self, it: _Iterate) -> dict:
        op, free = self.op, self.free
        AX = op.apply(it.X)
        xf = free.free_values(op.b - AX)
        y = free.y0 + free.expand(it.u)
        rp = op.b - AX - op.F @ xf
        Rd = [C - Zj - Aj for C, Zj, Aj in zip(self.C, it.Z, op.adjoint(y))]
        rf = op.cf - op.F.T @ y
        pobj = _inner(self.C, it.X) + float(op.cf @ xf)
        dobj = float(op.b @ y)
        xz = _inner(it.X, it.Z)
        # 原始残差按未均衡的原始行计
        pinf = float(np.max(np.abs(rp / self.row_scale))) if rp.size else 0.0
        dinf = (_fro(Rd) + float(np.linalg.norm(rf))) / (1.0 + self.c_norm)
        gap = max(xz, abs(pobj - dobj)) / (1.0 + abs(pobj) + abs(dobj))
        return {
            "rp": rp,
            "rp_reduced": self.b_reduced - free.reduce(AX),
            "Rd": Rd,
            "y": y,
            "xf": xf,
            "pobj": pobj,
            "dobj": dobj,
            "mu": xz / self.N if self.N else 0.0,
            "pinf": pinf,
            "dinf": dinf,
            "gap": gap,
        }

    def _converged(self, m: dict, factor: float = 1.0) -> bool:
        s = self.settings
        return (
            m["pinf"] <= factor * s.tol_eq
            and m["dinf"] <= factor * s.tol_eq
            and m["gap"] <= factor * s.tol_gap
        )

    def _score(self, m: dict) -> float:
        s = self.settings
        return max(m["pinf"] / s.tol_eq, m["dinf"] / s.tol_eq, m["gap"] / s.tol_gap)

    def _infeasibility(self, m: dict, tol: float) -> SdpStatus | None:
        op = self.op
        if m["dobj"] > 0:
            ray = _fro([C - R for C, R in zip(self.C, m["Rd"])]) + float(
                np.linalg.norm(op.F.T @ m["y"])
            )
            if ray / m["dobj"] <= tol:
                return SdpStatus.PRIMAL_INFEASIBLE
        if m["pobj"] < 0:
            ray = float(np.linalg.norm(op.b - m["rp"]))
            if ray / -m["pobj"] <= tol:
                return SdpStatus.DUAL_INFEASIBLE
        return None

    # ------------------------------------------------------------------ 牛顿方向

    def _direction(self, scalings, schur: _SchurSolver, Rc, m):
        """dX + W·dZ·W = Rc，dZ = Rd − 𝒜*(Q2·du)，Q2′𝒜(dX) = 约化原始残差"""
        op, free = self.op, self.free
        W = [s.W for s in scalings]
        target = [Rcj - Wj @ Rj @ Wj for Rcj, Wj, Rj in zip(Rc, W, m["Rd"])]
        du = schur.solve(m["rp_reduced"] - free.reduce(op.apply(target)))
        ATdy = op.adjoint(free.expand(du))
        dZ = [Rj - Aj for Rj, Aj in zip(m["Rd"], ATdy)]
        dX = [_symmetric(Rcj - Wj @ dZj @ Wj) for Rcj, Wj, dZj in zip(Rc, W, dZ)]
        return dX, du, dZ

    def _step_lengths(self, scalings, dX, dZ) -> tuple[float, float]:
        alpha_p = min((_max_step(s.chol_X, d) for s, d in zip(scalings, dX)), default=math.inf)
        alpha_d = min((_max_step(s.chol_Z, d) for s, d in zip(scalings, dZ)), default=math.inf)
        return alpha_p, alpha_d

    # ------------------------------------------------------------------ 主循环

    def run(self) -> SdpSolution:
        s = self.settings
        it = self._initial_point()

        cf_norm = float(np.linalg.norm(self.op.cf))
        if self.free.objective_defect > FREE_OBJECTIVE_TOL * (1.0 + cf_norm):
            logger.info(f"{LOG_TAG} 自由变量目标不在约束值域内，判定为对偶不可行")
            return self._finish(it, SdpStatus.DUAL_INFEASIBLE, 0)

        status = SdpStatus.MAX_ITERATIONS
        best, best_score = it, math.inf
        progress_score, progress_iteration = math.inf, 0
        iteration = 0
        for iteration in range(s.max_iterations + 1):
            m = self._measures(it)
            self._record(iteration, m)

            if self._converged(m):
                status = SdpStatus.OPTIMAL
                break
            verdict = self._infeasibility(m, INFEASIBILITY_TOL)
            if verdict is not None:
                status = verdict
                break
            if max(_fro(it.X), _fro(it.Z)) > DIVERGENCE_NORM:
                status = self._infeasibility(m, 1e-6) or SdpStatus.NUMERICAL_TROUBLE
                logger.warning(f"{LOG_TAG} 内点迭代发散，终止于第 {iteration} 步")
                break

            score = self._score(m)
            if score < best_score:
                best, best_score = it, score
            if iteration == s.max_iterations:
                break
            if score < 0.5 * progress_score:
                progress_score, progress_iteration = score, iteration
            elif progress_score <= NEAR_OPTIMAL_FACTOR and iteration - progress_iteration >= STALL_WINDOW:
                status = SdpStatus.NUMERICAL_TROUBLE
                logger.debug(f"{LOG_TAG} 内点迭代停滞，终止于第 {iteration} 步")
                break

            try:
                it = self._iterate(it, m)
            except _NumericalTrouble as e:
                logger.debug(f"{LOG_TAG} 第 {iteration} 步数值困难: {e}")
                status = SdpStatus.NUMERICAL_TROUBLE
                break

        if status in (SdpStatus.MAX_ITERATIONS, SdpStatus.NUMERICAL_TROUBLE):
            it = best
        return self._finish(it, status, iteration)

    def _iterate(self, it: _Iterate, m: dict) -> _Iterate:
        mu = m["mu"]
        scalings = [_nt_scaling(Lx, Lz) for Lx, Lz in zip(it.chol_X, it.chol_Z)]
        schur = _SchurSolver(self.free.reduce_matrix(self.op.schur([sc.W for sc in scalings])))

        # 预测步（σ = 0）
        dX_a, _, dZ_a = self._direction(scalings, schur, [-Xj for Xj in it.X], m)
        ap, ad = self._step_lengths(scalings, dX_a, dZ_a)
        ap, ad = min(1.0, ap), min(1.0, ad)
        mu_aff = _inner(
            [Xj + ap * d for Xj, d in zip(it.X, dX_a)], [Zj + ad * d for Zj, d in zip(it.Z, dZ_a)]
        ) / self.N
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # 校正步
        Rc = []
        for sc, dXj, dZj in zip(scalings, dX_a, dZ_a):
            dXt = sc.G_inv @ dXj @ sc.G_inv.T
            dZt = sc.G.T @ dZj @ sc.G
            product = dXt @ dZt
            psi = (product + product.T) / (sc.v[:, None] + sc.v[None, :])
            T = np.diag(sigma * mu / sc.v - sc.v) - psi
            Rc.append(sc.G @ T @ sc.G.T)
        dX, du, dZ = self._direction(scalings, schur, Rc, m)

        max_p, max_d = self._step_lengths(scalings, dX, dZ)
        gamma = 0.9 + 0.09 * min(1.0, max_p, max_d)
        alpha_p = min(1.0, gamma * max_p)
        alpha_d = min(1.0, gamma * max_d)
        if min(alpha_p, alpha_d) < COMBINED_STEP_RATIO * max(alpha_p, alpha_d):
            alpha_p = alpha_d = min(alpha_p, alpha_d)

        alpha_p, X, chol_X = _advance(it.X, dX, alpha_p, "原始")
        alpha_d, Z, chol_Z = _advance(it.Z, dZ, alpha_d, "对偶")
        self.history[-1]["step_primal"] = alpha_p
        self.history[-1]["step_dual"] = alpha_d
        self.history[-1]["sigma"] = sigma
        return _Iterate(X, Z, it.u + alpha_d * du, chol_X, chol_Z)

    def _record(self, iteration: int, m: dict) -> None:
        entry = {
            "iteration": iteration,
            "primal_objective": m["pobj"],
            "dual_objective": m["dobj"],
            "primal_infeasibility": m["pinf"],
            "dual_infeasibility": m["dinf"],
            "duality_gap": m["gap"],
            "mu": m["mu"],
        }
        self.history.append(entry)
        logger.debug(
            f"{LOG_TAG} IPM {iteration:3d}: pobj={m['pobj']:+.8e} dobj={m['dobj']:+.8e} "
            f"pinf={m['pinf']:.2e} dinf={m['dinf']:.2e} gap={m['gap']:.2e}"
        )

    def _finish(self, it: _Iterate, status: SdpStatus, iterations: int) -> SdpSolution:
        m = self._measures(it)
        min_eig = min((float(np.linalg.eigvalsh(Xj)[0]) for Xj in it.X), default=0.0)
        near = status is SdpStatus.OPTIMAL or (
            status in (SdpStatus.MAX_ITERATIONS, SdpStatus.NUMERICAL_TROUBLE)
            and self._converged(m, NEAR_OPTIMAL_FACTOR)
            and min_eig >= -NEAR_OPTIMAL_FACTOR * self.settings.tol_psd
        )
        logger.info(
            f"{LOG_TAG} SDP 求解结束: 状态 {status.value}, 迭代 {iterations}, "
            f"目标值 {m['pobj']:.10g}, 间隙 {m['gap']:.2e}"
        )
        return SdpSolution(
            block_values=it.X,
            free_values=m["xf"],
            objective_value=m["pobj"],
            status=status,
            residuals=SdpResiduals(m["pinf"], min_eig, m["gap"]),
            dual_values=m["y"] * self.row_scale,
            dual_objective=m["dobj"],
            iterations=iterations,
            near_optimal=near,
            history=self.history,
        )


def solve(problem: SdpProblem, settings: SolverSettings | None = None) -> SdpSolution:
    """求解块对角 SDP；数值失败通过状态返回，不抛出"""
    logger.debug(f"{LOG_TAG} SDP 规模: {problem.size_summary()}")
    return InteriorPointSolver(problem, settings).run()
