use ::safeball as sb;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;

use sb::{
    BallKind, Design, ElasticNetSpec, LassoSpec, LogisticL1Spec, PrimalDualPair, SolveOptions,
};

create_exception!(safeball, SafeballError, PyException);

fn err(e: sb::Error) -> PyErr {
    SafeballError::new_err(e.to_string())
}

fn design(rows: Vec<Vec<f64>>) -> PyResult<Design> {
    Design::from_rows(&rows).map_err(err)
}

#[pyclass(name = "Problem", frozen)]
struct PyProblem {
    inner: sb::Problem,
}

#[pymethods]
impl PyProblem {
    /// Least squares with an ℓ1 penalty, `A` given as a list of rows.
    #[staticmethod]
    fn lasso(a: Vec<Vec<f64>>, y: Vec<f64>, lam: f64) -> PyResult<Self> {
        let inner = sb::make_lasso(LassoSpec::l1(design(a)?, y, lam)).map_err(err)?;
        Ok(PyProblem { inner })
    }

    /// ℓ1-regularised logistic regression; labels must already be folded into the rows.
    #[staticmethod]
    fn logistic(a: Vec<Vec<f64>>, lam: f64) -> PyResult<Self> {
        let spec = LogisticL1Spec {
            a: design(a)?,
            lambda: lam,
        };
        let inner = sb::make_logistic(spec).map_err(err)?;
        Ok(PyProblem { inner })
    }

    #[staticmethod]
    fn elastic_net(a: Vec<Vec<f64>>, y: Vec<f64>, lam1: f64, lam2: f64) -> PyResult<Self> {
        let spec = ElasticNetSpec {
            a: design(a)?,
            y,
            lambda1: lam1,
            lambda2: lam2,
        };
        let inner = sb::make_elastic_net(spec).map_err(err)?;
        Ok(PyProblem { inner })
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    fn lambda_max(&self) -> f64 {
        self.inner.lambda_max()
    }

    /// `inf` outside the domain.
    fn primal(&self, x: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.primal_objective(&x).map_err(err)?.to_f64())
    }

    /// `-inf` for infeasible `u`.
    fn dual(&self, u: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.dual_objective(&u).map_err(err)?.to_f64())
    }

    fn gap(&self, x: Vec<f64>, u: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.duality_gap(&x, &u).map_err(err)?.to_f64())
    }

    fn dual_feasible(&self, u: Vec<f64>) -> PyResult<bool> {
        self.inner.dual_feasible(&u).map_err(err)
    }

    fn fenchel_divergence(&self, x: Vec<f64>, u: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.fenchel_divergence(&x, &u).map_err(err)?.to_f64())
    }

    fn bregman_divergence(&self, x: Vec<f64>, u: Vec<f64>) -> PyResult<f64> {
        Ok(self.inner.bregman_divergence(&x, &u).map_err(err)?.to_f64())
    }

    fn with_lambda(&self, lam: f64) -> PyResult<Self> {
        let inner = sb::with_lambda(&self.inner, lam).map_err(err)?;
        Ok(PyProblem { inner })
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(m={}, n={}, g={})",
            self.inner.m(),
            self.inner.n(),
            self.inner.regularizer().name()
        )
    }
}

#[pyclass(name = "Pair", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPair {
    inner: PrimalDualPair,
}

#[pymethods]
impl PyPair {
    #[new]
    fn new(problem: &PyProblem, x: Vec<f64>, u: Vec<f64>) -> PyResult<Self> {
        let inner = PrimalDualPair::new(&problem.inner, x, u).map_err(err)?;
        Ok(PyPair { inner })
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x.clone()
    }

    #[getter]
    fn u(&self) -> Vec<f64> {
        self.inner.u.clone()
    }

    #[getter]
    fn linked(&self) -> bool {
        self.inner.linked
    }

    #[getter]
    fn gamma(&self) -> Option<f64> {
        self.inner.gamma
    }
}

#[pyclass(name = "Ball", frozen)]
struct PyBall {
    inner: sb::Ball,
}

#[pymethods]
impl PyBall {
    #[getter]
    fn tag(&self) -> &'static str {
        self.inner.tag.as_str()
    }

    #[getter]
    fn center(&self) -> Vec<f64> {
        self.inner.center.clone()
    }

    #[getter]
    fn radius(&self) -> f64 {
        self.inner.radius
    }

    fn contains(&self, v: Vec<f64>) -> PyResult<bool> {
        self.inner.contains(&v).map_err(err)
    }

    fn is_subset_of(&self, other: &PyBall) -> PyResult<bool> {
        self.inner.is_subset_of(&other.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Ball(tag={}, radius={:e})",
            self.inner.tag, self.inner.radius
        )
    }
}

fn kind(name: &str) -> PyResult<BallKind> {
    BallKind::parse(name).ok_or_else(|| SafeballError::new_err(format!("unknown ball `{name}`")))
}

#[pyfunction]
fn dual_scaling(problem: &PyProblem, x: Vec<f64>) -> PyResult<PyPair> {
    let inner = sb::dual_scaling(&problem.inner, &x).map_err(err)?;
    Ok(PyPair { inner })
}

#[pyfunction]
#[pyo3(signature = (problem, lambda0, tol = 1e-12))]
fn sequential_pair(
    py: Python<'_>,
    problem: &PyProblem,
    lambda0: f64,
    tol: f64,
) -> PyResult<PyPair> {
    let p = &problem.inner;
    let inner = py
        .detach(|| sb::sequential_pair(p, lambda0, tol))
        .map_err(err)?;
    Ok(PyPair { inner })
}

/// Builds the named ball (`"ryu"`, `"gap"`, `"sasvi"`, ...) from a pair.
#[pyfunction]
fn ball(name: &str, problem: &PyProblem, pair: &PyPair) -> PyResult<PyBall> {
    let inner = sb::build_ball(kind(name)?, &problem.inner, &pair.inner).map_err(err)?;
    Ok(PyBall { inner })
}

#[pyfunction]
fn applicable_balls(problem: &PyProblem, pair: &PyPair) -> Vec<&'static str> {
    sb::applicable_kinds(&problem.inner, &pair.inner)
        .into_iter()
        .map(BallKind::as_str)
        .collect()
}

/// Indices of the coordinates certified to vanish at every solution.
#[pyfunction]
fn screen(problem: &PyProblem, ball: &PyBall) -> PyResult<Vec<usize>> {
    let mask = sb::screen_l1(&problem.inner, &ball.inner).map_err(err)?;
    Ok(mask.screened_indices())
}

/// Returns `(x, u, gap, iterations)`; raises if the tolerance is not met.
#[pyfunction]
#[pyo3(signature = (problem, gap_tolerance = 1e-10, max_iters = 100_000, screening = None, period = 10))]
fn solve(
    py: Python<'_>,
    problem: &PyProblem,
    gap_tolerance: f64,
    max_iters: usize,
    screening: Option<&str>,
    period: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, f64, usize)> {
    let dynamic_screening = match screening {
        Some(name) => Some(sb::DynamicScreening {
            ball: kind(name)?,
            period,
            shadow: None,
        }),
        None => None,
    };
    let opts = SolveOptions {
        gap_tolerance,
        max_iters,
        dynamic_screening,
        ..SolveOptions::default()
    };
    let p = &problem.inner;
    let res = py.detach(|| sb::prox_grad_solve(p, &opts)).map_err(err)?;
    Ok((res.x, res.u, res.gap.to_f64(), res.iterations))
}

#[pyfunction]
fn soft_threshold(v: Vec<f64>, t: f64) -> PyResult<Vec<f64>> {
    sb::soft_threshold(&v, t).map_err(err)
}

#[pymodule]
#[pyo3(name = "safeball")]
fn safeball_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SafeballError", m.py().get_type::<SafeballError>())?;
    m.add_class::<PyProblem>()?;
    m.add_class::<PyPair>()?;
    m.add_class::<PyBall>()?;
    m.add_function(wrap_pyfunction!(dual_scaling, m)?)?;
    m.add_function(wrap_pyfunction!(sequential_pair, m)?)?;
    m.add_function(wrap_pyfunction!(ball, m)?)?;
    m.add_function(wrap_pyfunction!(applicable_balls, m)?)?;
    m.add_function(wrap_pyfunction!(screen, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(soft_threshold, m)?)?;
    Ok(())
}
