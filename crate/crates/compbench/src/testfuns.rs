//! Catalog of deterministic test functions with box domains and
//! inequality constraints.
//!
//! Every function returns an objective value plus a (possibly empty)
//! constraint vector; an input is feasible when every constraint value
//! is `<= 0`. Inputs are validated against the declared box domain
//! before evaluation.

use std::f64::consts::PI;
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TestFunError {
    #[error("Input is invalid.")]
    InvalidInput,
    #[error("Input is outside of the domain.")]
    OutOfDomain,
    #[error("Unknown function: {0}")]
    UnknownFunction(String),
}

/// Axis-aligned box `[lower_i, upper_i]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        assert_eq!(lower.len(), upper.len());
        assert!(lower.iter().zip(&upper).all(|(l, u)| l < u));
        BoxDomain { lower, upper }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&xi, (&l, &u))| xi >= l && xi <= u)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(l, u)| 0.5 * (l + u))
            .collect()
    }

    /// Maps `x` to `[0,1]^d` coordinates.
    pub fn rescale(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&xi, (&l, &u))| (xi - l) / (u - l))
            .collect()
    }

    /// Maps `[0,1]^d` coordinates back into the box.
    pub fn unrescale(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&ui, (&l, &h))| l + ui * (h - l))
            .collect()
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (xi, (&l, &u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *xi = xi.clamp(l, u);
        }
    }
}

/// Objective value plus constraint vector; feasible iff every entry of
/// `con` is `<= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub obj: f64,
    pub con: Vec<f64>,
}

impl Evaluation {
    pub fn is_feasible(&self) -> bool {
        self.con.iter().all(|&c| c <= 0.0)
    }
}

/// Registry entry for one catalog function.
#[derive(Debug, Clone)]
pub struct FunctionSpec {
    pub name: &'static str,
    pub dim: usize,
    pub domain: BoxDomain,
    pub n_constraints: usize,
    pub description: &'static str,
}

impl FunctionSpec {
    pub fn is_constrained(&self) -> bool {
        self.n_constraints > 0
    }
}

fn build_registry() -> Vec<FunctionSpec> {
    vec![
        FunctionSpec {
            name: "bbox1",
            dim: 2,
            domain: BoxDomain::new(vec![-1.5, -3.0], vec![2.5, 3.0]),
            n_constraints: 2,
            description: "Black-box 1 stand-in: smooth 2-d objective with two \
                          disconnected feasible lobes (artifact-chosen formula).",
        },
        FunctionSpec {
            name: "bbox2",
            dim: 2,
            domain: BoxDomain::new(vec![-3.0, -2.0], vec![3.0, 2.0]),
            n_constraints: 0,
            description: "Black-box 2 stand-in: six-hump camel (artifact-chosen \
                          formula and domain).",
        },
        FunctionSpec {
            name: "bbox3",
            dim: 2,
            domain: BoxDomain::new(vec![-5.0, -5.0], vec![5.0, 5.0]),
            n_constraints: 0,
            description: "Black-box 3 stand-in: Himmelblau (artifact-chosen \
                          formula and domain).",
        },
        FunctionSpec {
            name: "bbox4",
            dim: 2,
            domain: BoxDomain::new(vec![-5.0, 0.0], vec![10.0, 15.0]),
            n_constraints: 1,
            description: "Black-box 4 stand-in: Branin objective with a disk \
                          constraint (artifact-chosen formula and domain).",
        },
        FunctionSpec {
            name: "bbox5",
            dim: 3,
            domain: BoxDomain::new(vec![0.0; 3], vec![1.0; 3]),
            n_constraints: 0,
            description: "Black-box 5 stand-in: Hartmann-3 (artifact-chosen \
                          formula and domain).",
        },
        FunctionSpec {
            name: "bbox6",
            dim: 1,
            domain: BoxDomain::new(vec![0.5], vec![2.5]),
            n_constraints: 2,
            description: "Black-box 6 stand-in: 1-d multimodal objective with \
                          two constraints (artifact-chosen formula and domain).",
        },
        FunctionSpec {
            name: "bbox7",
            dim: 8,
            domain: BoxDomain::new(vec![-1.0; 8], vec![1.0; 8]),
            n_constraints: 2,
            description: "Black-box 7 stand-in: 8-d weighted quadratic with \
                          cosine coupling and two constraints (artifact-chosen \
                          formula and domain).",
        },
        FunctionSpec {
            name: "gram",
            dim: 2,
            domain: BoxDomain::new(vec![0.0, 0.0], vec![1.0, 1.0]),
            n_constraints: 2,
            description: "Two-constraint toy problem on the unit square \
                          (artifact-chosen domain).",
        },
        FunctionSpec {
            name: "mtp",
            dim: 2,
            domain: BoxDomain::new(vec![-2.25, -2.5], vec![2.5, 1.75]),
            n_constraints: 2,
            description: "Modified town-brook style 2-d problem with a rose \
                          curve constraint (artifact-chosen formula and domain).",
        },
        FunctionSpec {
            name: "pressure",
            dim: 4,
            domain: BoxDomain::new(
                vec![0.0625, 0.0625, 10.0, 10.0],
                vec![6.1875, 6.1875, 200.0, 200.0],
            ),
            n_constraints: 4,
            description: "Pressure vessel design: minimize material, forming \
                          and welding cost over shell thickness, head \
                          thickness, inner radius and cylinder length \
                          (continuous thicknesses; artifact-chosen domain).",
        },
        FunctionSpec {
            name: "sprinkler",
            dim: 8,
            domain: BoxDomain::new(vec![0.0; 8], vec![1.0; 8]),
            n_constraints: 0,
            description: "Sprinkler stand-in: scalar 8-d surrogate objective \
                          (artifact-chosen formula; not comparable to any \
                          physics-based sprinkler model).",
        },
        FunctionSpec {
            name: "tension",
            dim: 3,
            domain: BoxDomain::new(vec![0.05, 0.25, 2.0], vec![2.0, 1.3, 15.0]),
            n_constraints: 4,
            description: "Tension spring design: minimize spring weight over \
                          wire diameter, mean coil diameter and number of \
                          active coils, subject to shear stress, surge \
                          frequency and deflection constraints.",
        },
    ]
}

/// All twelve catalog functions, sorted by name.
pub fn list_functions() -> &'static [FunctionSpec] {
    static REGISTRY: OnceLock<Vec<FunctionSpec>> = OnceLock::new();
    REGISTRY.get_or_init(build_registry)
}

pub fn lookup(name: &str) -> Result<&'static FunctionSpec, TestFunError> {
    list_functions()
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| TestFunError::UnknownFunction(name.to_string()))
}

/// Checks length, finiteness and box membership of `x` against `spec`.
pub fn validate_input(spec: &FunctionSpec, x: &[f64]) -> Result<(), TestFunError> {
    if x.len() != spec.dim || x.iter().any(|v| !v.is_finite()) {
        return Err(TestFunError::InvalidInput);
    }
    if !spec.domain.contains(x) {
        return Err(TestFunError::OutOfDomain);
    }
    Ok(())
}

/// Evaluates the named catalog function at `x` after input validation.
pub fn evaluate(name: &str, x: &[f64]) -> Result<Evaluation, TestFunError> {
    let spec = lookup(name)?;
    validate_input(spec, x)?;
    Ok(evaluate_unchecked(name, x))
}

/// Raw dispatch without validation; `name` must be registered and `x`
/// in-domain.
pub(crate) fn evaluate_unchecked(name: &str, x: &[f64]) -> Evaluation {
    match name {
        "bbox1" => bbox1(x[0], x[1]),
        "bbox2" => bbox2(x[0], x[1]),
        "bbox3" => bbox3(x[0], x[1]),
        "bbox4" => bbox4(x[0], x[1]),
        "bbox5" => bbox5(x),
        "bbox6" => bbox6(x[0]),
        "bbox7" => bbox7(x),
        "gram" => gram(x[0], x[1]),
        "mtp" => mtp(x[0], x[1]),
        "pressure" => pressure(x[0], x[1], x[2], x[3]),
        "sprinkler" => sprinkler(x),
        "tension" => tension(x[0], x[1], x[2]),
        _ => unreachable!("unregistered function {name}"),
    }
}

/// Tension spring weight and its four design constraints.
///
/// Inputs: wire diameter `x1`, mean coil diameter `x2`, active coils `x3`.
/// The constraint ordering and the `12566*x2*x1^3 - x1^4` denominator
/// grouping are fixed by the published evaluation at (1, 1, 3).
pub fn tension(x1: f64, x2: f64, x3: f64) -> Evaluation {
    let obj = (x3 + 2.0) * x2 * x1 * x1;
    let con1 = 1.0 - (x2.powi(3) * x3) / (71785.0 * x1.powi(4));
    let con2 = 1.0 - (140.45 * x1) / (x2 * x2 * x3);
    let con3 = (4.0 * x2 * x2 - x1 * x2) / (12566.0 * x2 * x1.powi(3) - x1.powi(4))
        + 1.0 / (5108.0 * x1 * x1)
        - 1.0;
    let con4 = (x1 + x2) / 1.5 - 1.0;
    Evaluation {
        obj,
        con: vec![con1, con2, con3, con4],
    }
}

/// Pressure vessel cost and its four constraints.
///
/// Inputs: shell thickness `x1`, head thickness `x2`, inner radius `x3`,
/// cylinder length `x4`. Standard cost polynomial with continuous
/// thicknesses.
pub fn pressure(x1: f64, x2: f64, x3: f64, x4: f64) -> Evaluation {
    let obj = 0.6224 * x1 * x3 * x4
        + 1.7781 * x2 * x3 * x3
        + 3.1661 * x1 * x1 * x4
        + 19.84 * x1 * x1 * x3;
    let con = vec![
        -x1 + 0.0193 * x3,
        -x2 + 0.00954 * x3,
        -PI * x3 * x3 * x4 - (4.0 / 3.0) * PI * x3.powi(3) + 1_296_000.0,
        x4 - 240.0,
    ];
    Evaluation { obj, con }
}

/// Linear objective with a sinusoidal and a disk constraint on [0,1]^2.
pub fn gram(x1: f64, x2: f64) -> Evaluation {
    let obj = x1 + x2;
    let con1 = 1.5 - x1 - 2.0 * x2 - 0.5 * (2.0 * PI * (x1 * x1 - 2.0 * x2)).sin();
    let con2 = x1 * x1 + x2 * x2 - 1.5;
    Evaluation {
        obj,
        con: vec![con1, con2],
    }
}

fn bbox1(x1: f64, x2: f64) -> Evaluation {
    let obj = (x1 + x2).sin() + (x1 - x2) * (x1 - x2) - 1.5 * x1 + 2.5 * x2 + 1.0;
    let con = vec![1.5 - x1 * x1 - x2 * x2, x1 * x2 + 0.5];
    Evaluation { obj, con }
}

fn bbox2(x1: f64, x2: f64) -> Evaluation {
    let obj = (4.0 - 2.1 * x1 * x1 + x1.powi(4) / 3.0) * x1 * x1
        + x1 * x2
        + (-4.0 + 4.0 * x2 * x2) * x2 * x2;
    Evaluation { obj, con: vec![] }
}

fn bbox3(x1: f64, x2: f64) -> Evaluation {
    let a = x1 * x1 + x2 - 11.0;
    let b = x1 + x2 * x2 - 7.0;
    Evaluation {
        obj: a * a + b * b,
        con: vec![],
    }
}

fn bbox4(x1: f64, x2: f64) -> Evaluation {
    let obj = {
        let t = x2 - 5.1 * x1 * x1 / (4.0 * PI * PI) + 5.0 * x1 / PI - 6.0;
        t * t + 10.0 * (1.0 - 1.0 / (8.0 * PI)) * x1.cos() + 10.0
    };
    let con = vec![(x1 - 2.5) * (x1 - 2.5) + (x2 - 7.5) * (x2 - 7.5) - 50.0];
    Evaluation { obj, con }
}

fn bbox5(x: &[f64]) -> Evaluation {
    const ALPHA: [f64; 4] = [1.0, 1.2, 3.0, 3.2];
    const A: [[f64; 3]; 4] = [
        [3.0, 10.0, 30.0],
        [0.1, 10.0, 35.0],
        [3.0, 10.0, 30.0],
        [0.1, 10.0, 35.0],
    ];
    const P: [[f64; 3]; 4] = [
        [0.3689, 0.1170, 0.2673],
        [0.4699, 0.4387, 0.7470],
        [0.1091, 0.8732, 0.5547],
        [0.0381, 0.5743, 0.8828],
    ];
    let mut obj = 0.0;
    for i in 0..4 {
        let mut s = 0.0;
        for j in 0..3 {
            let d = x[j] - P[i][j];
            s += A[i][j] * d * d;
        }
        obj -= ALPHA[i] * (-s).exp();
    }
    Evaluation { obj, con: vec![] }
}

fn bbox6(x: f64) -> Evaluation {
    let obj = (10.0 * PI * x).sin() / (2.0 * x) + (x - 1.0).powi(4);
    let con = vec![(3.0 * PI * x).cos(), 0.7 - x];
    Evaluation { obj, con }
}

fn bbox7(x: &[f64]) -> Evaluation {
    let mut quad = 0.0;
    let mut prod = 1.0;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for (i, &xi) in x.iter().enumerate() {
        let k = (i + 1) as f64;
        quad += k * xi * xi;
        prod *= (xi / k.sqrt()).cos();
        sum += xi;
        sumsq += xi * xi;
    }
    Evaluation {
        obj: quad - prod,
        con: vec![sum - 2.0, 0.5 - sumsq],
    }
}

fn mtp(x1: f64, x2: f64) -> Evaluation {
    let obj = -((x1 - 0.1) * x2).cos().powi(2) - x1 * (3.0 * x1 + x2).sin();
    let t = x1.atan2(x2);
    let rose = 2.0 * t.cos() - 0.5 * (2.0 * t).cos() - 0.25 * (3.0 * t).cos()
        - 0.125 * (4.0 * t).cos();
    let r2 = x1 * x1 + x2 * x2;
    let sin_t = 2.0 * t.sin();
    let con = vec![r2 - rose * rose - sin_t * sin_t, r2 - 4.0];
    Evaluation { obj, con }
}

fn sprinkler(x: &[f64]) -> Evaluation {
    let mut sum = 0.0;
    let mut prod = 1.0;
    for (i, &xi) in x.iter().enumerate() {
        let k = (i + 2) as f64;
        sum += (xi / k) * (xi / k);
        prod *= (PI * xi / k).cos();
    }
    Evaluation {
        obj: sum - 2.0 * prod,
        con: vec![],
    }
}
