"""Constraint-based causal structure learning.

Thin wrappers over the compiled core; graphs and reports come back as
plain dicts decoded from the library's JSON output.
"""

import json

from ._core import (
    CauseweaveError,
    CITestResult,
    Dataset,
    ci_test,
    d_separated,
    gen_discrete_net,
    gen_linear_sem,
    json_to_dot,
    load_csv,
    parse_csv,
)
from . import _core

__all__ = [
    "CauseweaveError",
    "CITestResult",
    "Dataset",
    "ci_test",
    "d_separated",
    "gen_discrete_net",
    "gen_linear_sem",
    "json_to_dot",
    "learn",
    "learn_injected",
    "learn_oracle",
    "load_csv",
    "parse_csv",
    "score",
    "simulate",
]


def learn(data, alpha=0.05, m_ci=3, algorithm="proposed", threads=1, prior=None):
    """Learn a CPDAG from a Dataset. `prior` is a dict in the prior-knowledge format."""
    prior_json = json.dumps(prior) if prior else ""
    return json.loads(_core.learn_json(data, alpha, m_ci, algorithm, threads, prior_json))


def learn_injected(table, alpha=0.05, m_ci=3, algorithm="proposed"):
    """Learn from a list of {x, y, s, p} records instead of data."""
    return json.loads(_core.learn_injected_json(json.dumps(table), alpha, m_ci, algorithm))


def learn_oracle(names, edges, m_ci=3, algorithm="proposed"):
    """Learn with d-separation in the DAG `edges` (index pairs) as the CI test."""
    return json.loads(_core.learn_oracle_json(list(names), list(edges), m_ci, algorithm))


def score(data, graph):
    """BIC report for a graph given as a dict, JSON text or DOT text."""
    text = graph if isinstance(graph, str) else json.dumps(graph)
    return json.loads(_core.score_json(data, text))


def simulate(preset="categorical", k=20, n=500, reps=100, seed=1, threads=1,
             alpha=None, m_ci=None, theta=0.5, rho=0.04, score=True):
    return json.loads(_core.simulate_json(preset, k, n, reps, seed, threads,
                                          alpha, m_ci, theta, rho, score))
