"""
Analysis layer: correlations, OLS with dummy-coded factors, nested F tests and
two-way ANOVA over an AnalysisTable.

Model terms follow the usual formula notation: a bare column name is a numeric
covariate, `C(col)` a categorical factor (dummy coded, alphabetically first
level as reference) and `C(a):C(b)` an interaction.
"""
import itertools
import logging
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
from scipy import linalg, special
from scipy.stats import rankdata

from .exceptions import RankDeficientError, StatsError

logger = logging.getLogger(__name__)

_CATEGORICAL = re.compile(r'C\(\s*([^()\s]+)\s*\)')


class AnalysisTable:
    """One row per tokenizer configuration; a pandas frame underneath."""

    def __init__(self, frame):
        self.frame = frame.reset_index(drop=True)

    @classmethod
    def read_csv(cls, path):
        path = Path(path)
        if not path.is_file():
            raise StatsError(f"analysis table not found: {path}")
        return cls(pd.read_csv(path, dtype={'config_id': str, 'tokenizer': str, 'pre_tokenizer': str}))

    @classmethod
    def from_rows(cls, rows, columns=None, dtype=None):
        return cls(pd.DataFrame(list(rows), columns=list(columns) if columns else None, dtype=dtype))

    def to_csv(self, path):
        """Atomic write; float formatting is repr-exact so reruns are byte-identical."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + '.tmp')
        try:
            self.frame.to_csv(tmp, index=False, lineterminator='\n')
            os.replace(tmp, path)
        except BaseException:
            tmp.unlink(missing_ok=True)
            raise

    def to_csv_text(self):
        return self.frame.to_csv(index=False, lineterminator='\n')

    def __len__(self):
        return len(self.frame)

    @property
    def columns(self):
        return list(self.frame.columns)

    def _require(self, name):
        if name not in self.frame.columns:
            raise StatsError(f"column '{name}' not in table (have: {', '.join(self.columns)})")
        if self.frame[name].isna().any():
            raise StatsError(f"column '{name}' has missing values")
        return self.frame[name]

    def numeric(self, name):
        try:
            return self._require(name).astype(float).to_numpy()
        except ValueError as exc:
            raise StatsError(f"column '{name}' is not numeric") from exc

    def categorical(self, name):
        return self._require(name).astype(str).to_numpy()

    def levels(self, name):
        return sorted(set(self.categorical(name)))

    def subset(self, **equals):
        frame = self.frame
        for column, value in equals.items():
            frame = frame[frame[column].astype(str) == str(value)]
        return AnalysisTable(frame)


def _json_number(value):
    """Non-finite statistics (a perfect fit's t) serialize as null."""
    if value is None or not np.isfinite(value):
        return None
    return float(value)


@dataclass(frozen=True)
class StatsResult:
    kind: str
    n: int
    estimate: float | None = None
    statistic: float | None = None
    p_value: float | None = None
    df: tuple = ()
    terms: dict = field(default_factory=dict)
    rss: float | None = None
    # OLS residuals in row order; not serialized
    residuals: tuple = field(default=(), repr=False)

    def as_dict(self):
        return {
            'kind': self.kind,
            'n': self.n,
            'estimate': _json_number(self.estimate),
            'statistic': _json_number(self.statistic),
            'p_value': _json_number(self.p_value),
            'df': list(self.df),
            'terms': self.terms,
            'rss': self.rss,
        }


# ---------------------------------------------------------------------------
# Distribution tails via the regularized incomplete beta function
# ---------------------------------------------------------------------------

def t_two_sided(t, df):
    if not np.isfinite(t):
        return 0.0
    return float(special.betainc(df / 2.0, 0.5, df / (df + t * t)))


def f_upper(f, df_num, df_den):
    if f <= 0:
        return 1.0
    if not np.isfinite(f):
        return 0.0
    return float(special.betainc(df_den / 2.0, df_num / 2.0, df_den / (df_den + df_num * f)))


# ---------------------------------------------------------------------------
# Correlations
# ---------------------------------------------------------------------------

def _vectors(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise StatsError(f"x and y must be vectors of equal length, got {x.shape} and {y.shape}")
    if len(x) < 3:
        raise StatsError(f"correlation needs at least 3 observations, got {len(x)}")
    if not (np.isfinite(x).all() and np.isfinite(y).all()):
        raise StatsError("correlation inputs contain missing or infinite values")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise StatsError("correlation is undefined for a constant vector")
    return x, y


def _correlate(kind, x, y):
    n = len(x)
    dx = x - x.mean()
    dy = y - y.mean()
    r = float(np.clip(dx @ dy / np.sqrt((dx @ dx) * (dy @ dy)), -1.0, 1.0))
    df = n - 2
    t = np.inf if abs(r) == 1.0 else r * np.sqrt(df) / np.sqrt(1.0 - r * r)
    return StatsResult(kind=kind, n=n, estimate=r, statistic=float(t), p_value=t_two_sided(t, df), df=(df,))


def pearson(x, y):
    x, y = _vectors(x, y)
    return _correlate('pearson', x, y)


def spearman(x, y):
    """Pearson correlation of mid-ranks, with the same t approximation for p."""
    x, y = _vectors(x, y)
    return _correlate('spearman', rankdata(x), rankdata(y))


def correlate(table, x, y, method='pearson'):
    methods = {'pearson': pearson, 'spearman': spearman}
    if method not in methods:
        raise StatsError(f"unknown correlation method '{method}'")
    return methods[method](table.numeric(x), table.numeric(y))


# ---------------------------------------------------------------------------
# Design matrices and least squares
# ---------------------------------------------------------------------------

def _term_columns(table, part):
    match = _CATEGORICAL.fullmatch(part.strip())
    if match:
        name = match.group(1)
        values = table.categorical(name)
        levels = table.levels(name)
        if len(levels) < 2:
            raise StatsError(f"factor '{name}' has a single level")
        return [(f'C({name})[T.{level}]', (values == level).astype(float)) for level in levels[1:]]
    name = part.strip()
    return [(name, table.numeric(name))]


def design_matrix(table, terms):
    """Intercept plus the columns of every term; returns (X, column names, term of each column)."""
    names = ['Intercept']
    owners = ['Intercept']
    columns = [np.ones(len(table))]
    for term in terms:
        pieces = [_term_columns(table, part) for part in term.split(':')]
        for combination in itertools.product(*pieces):
            names.append(':'.join(name for name, _ in combination))
            owners.append(term)
            columns.append(np.prod([vector for _, vector in combination], axis=0))
    return np.column_stack(columns), names, owners


def _collinear(X, names):
    collinear = []
    rank = 0
    for j in range(X.shape[1]):
        new_rank = np.linalg.matrix_rank(X[:, :j + 1])
        if new_rank == rank:
            collinear.append(names[j])
        rank = new_rank
    return collinear


@dataclass(frozen=True)
class _Fit:
    coefficients: np.ndarray
    residuals: np.ndarray
    rss: float
    df_resid: int
    names: list
    R: np.ndarray


def _least_squares(y, X, names):
    n, p = X.shape
    collinear = _collinear(X, names)
    if collinear:
        raise RankDeficientError(collinear)
    if n <= p:
        raise StatsError(f"{n} observations cannot support {p} parameters")
    Q, R = np.linalg.qr(X)
    coefficients = linalg.solve_triangular(R, Q.T @ y)
    residuals = y - X @ coefficients
    return _Fit(coefficients=coefficients, residuals=residuals, rss=float(residuals @ residuals),
                df_resid=n - p, names=names, R=R)


def _response(table, response, terms):
    y = table.numeric(response)
    X, names, owners = design_matrix(table, terms)
    return y, X, names, owners


def ols_fit(table, response, terms):
    y, X, names, _ = _response(table, response, terms)
    fit = _least_squares(y, X, names)
    sigma2 = fit.rss / fit.df_resid
    R_inv = linalg.solve_triangular(fit.R, np.eye(fit.R.shape[0]))
    se = np.sqrt(sigma2 * np.sum(R_inv * R_inv, axis=1))
    coefficients = {}
    with np.errstate(divide='ignore', invalid='ignore'):
        t = fit.coefficients / se
    for name, coef, error, value in zip(names, fit.coefficients, se, t):
        coefficients[name] = {
            'coef': float(coef),
            'se': float(error),
            't': float(value) if np.isfinite(value) else None,
            'p': t_two_sided(float(value), fit.df_resid) if not np.isnan(value) else None,
        }
    logger.debug("OLS %s ~ %s: RSS=%.6g df=%d", response, ' + '.join(terms), fit.rss, fit.df_resid)
    return StatsResult(kind='ols', n=len(y), df=(fit.df_resid,), terms=coefficients, rss=fit.rss,
                       residuals=tuple(float(r) for r in fit.residuals))


def _f_statistic(ss, df_num, mse, total_scale):
    if ss <= 1e-12 * max(1.0, total_scale):
        return 0.0
    if mse <= 0:
        return np.inf
    return (ss / df_num) / mse


def nested_f(table, response, reduced, full):
    reduced = list(reduced)
    full = list(full)
    if not set(reduced) < set(full):
        raise StatsError("reduced terms must be a strict subset of the full terms")
    y, X_full, names_full, _ = _response(table, response, full)
    _, X_reduced, names_reduced, _ = _response(table, response, reduced)
    fit_full = _least_squares(y, X_full, names_full)
    fit_reduced = _least_squares(y, X_reduced, names_reduced)
    df_num = fit_reduced.df_resid - fit_full.df_resid
    if df_num <= 0:
        raise StatsError("full model adds no parameters; F is undefined")
    ss = fit_reduced.rss - fit_full.rss
    total = float(((y - y.mean()) ** 2).sum())
    f = _f_statistic(ss, df_num, fit_full.rss / fit_full.df_resid, total)
    return StatsResult(
        kind='nested_f', n=len(y), statistic=float(f), p_value=f_upper(f, df_num, fit_full.df_resid),
        df=(df_num, fit_full.df_resid), rss=fit_full.rss,
        terms={'added': [t for t in full if t not in reduced], 'rss_reduced': fit_reduced.rss},
    )


def anova_two_way(table, response, factor_a, factor_b, interaction=False):
    """Type-II sums of squares; the residual comes from the largest fitted model."""
    a, b = f'C({factor_a})', f'C({factor_b})'
    ab = f'{a}:{b}'
    y = table.numeric(response)

    def rss(terms):
        X, names, _ = design_matrix(table, terms)
        return _least_squares(y, X, names)

    main = rss([a, b])
    largest = rss([a, b, ab]) if interaction else main
    mse = largest.rss / largest.df_resid
    total = float(((y - y.mean()) ** 2).sum())

    drops = [(a, rss([b]), main), (b, rss([a]), main)]
    if interaction:
        drops.append((ab, main, largest))
    terms = {}
    for term, reduced, full in drops:
        df_num = reduced.df_resid - full.df_resid
        ss = max(0.0, reduced.rss - full.rss)
        f = _f_statistic(ss, df_num, mse, total)
        terms[term] = {'sum_sq': ss, 'df': df_num, 'F': _json_number(f), 'p': f_upper(f, df_num, largest.df_resid)}
    terms['Residual'] = {'sum_sq': largest.rss, 'df': largest.df_resid, 'F': None, 'p': None}
    logger.info("ANOVA %s ~ %s: %s", response, ' + '.join(t for t in terms if t != 'Residual'),
                ', '.join(f"F({t})={v['F']:.4g}" for t, v in terms.items() if v['F'] is not None))
    return StatsResult(kind='anova', n=len(y), df=(largest.df_resid,), terms=terms, rss=largest.rss)
