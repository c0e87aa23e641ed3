//! WebAssembly bindings for the browser demo in `www/`.

use js_sys::Float64Array;
use wasm_bindgen::prelude::*;

use crossdiff::counterexample::verify_negative_direction;
use crossdiff::entropy;
use crossdiff::harness::registry;
use crossdiff::kernel::cell_average;
use crossdiff::{Error, KernelSpec, Mesh, Scheme, SolverOptions, State, Stepper};

fn js_err(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

/// A running simulation of one built-in test case on a chosen mesh.
#[wasm_bindgen]
pub struct Simulation {
    scheme: Scheme,
    state: State,
    dt: f64,
}

#[wasm_bindgen]
impl Simulation {
    /// `preset` is a test-case name from the registry. `local` replaces every
    /// cross kernel by the Dirac mass.
    #[wasm_bindgen(constructor)]
    pub fn new(preset: &str, cells: usize, dt: f64, local: bool) -> Result<Simulation, JsError> {
        let cfg = registry::preset(preset).map_err(js_err)?;
        let params = if local {
            cfg.model.localized()
        } else {
            cfg.model.clone()
        };
        let mesh = Mesh::new(cells).map_err(js_err)?;
        let scheme = Scheme::new(params, mesh).map_err(js_err)?;
        let state = cfg.initial_state(&mesh).map_err(js_err)?;
        Ok(Simulation { scheme, state, dt })
    }

    /// Advances by `steps` time steps.
    pub fn advance(&mut self, steps: usize) -> Result<(), JsError> {
        let mut stepper = Stepper::new(&self.scheme, SolverOptions::default());
        for _ in 0..steps {
            let (next, _) = stepper.step(&self.state, self.dt).map_err(js_err)?;
            self.state = next;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    pub fn species(&self) -> usize {
        self.state.species()
    }

    pub fn cells(&self) -> usize {
        self.state.cells()
    }

    /// Densities of all species, concatenated.
    pub fn densities(&self) -> Float64Array {
        Float64Array::from(self.state.flat().as_slice())
    }

    /// `[H_B, H_R, mass_1, ..., mass_n]`.
    pub fn diagnostics(&self) -> Result<Float64Array, JsError> {
        let hb = entropy::boltzmann_entropy(&self.scheme, &self.state).map_err(js_err)?;
        let hr = entropy::rao_entropy(&self.scheme, &self.state).map_err(js_err)?;
        let mut out = vec![hb, hr];
        out.extend(self.state.masses());
        Ok(Float64Array::from(out.as_slice()))
    }
}

/// Names of the built-in test cases.
#[wasm_bindgen]
pub fn presets() -> Vec<JsValue> {
    registry::list()
        .iter()
        .map(|p| JsValue::from_str(p.name))
        .collect()
}

/// Cell averages `B_m`, `m = 0..cells`, of a kernel: `shape` is one of
/// `indicator`, `triangle`, `gaussian`; `size` is the radius or the width.
#[wasm_bindgen]
pub fn kernel_weights(shape: &str, size: f64, cells: usize) -> Result<Float64Array, JsError> {
    let spec = match shape {
        "indicator" => KernelSpec::normalized_indicator(size),
        "triangle" => KernelSpec::normalized_triangle(size),
        "gaussian" => KernelSpec::gaussian(size),
        other => return Err(JsError::new(&format!("unknown kernel shape {other}"))),
    };
    let mesh = Mesh::new(cells).map_err(js_err)?;
    let k = cell_average(&spec, &mesh).map_err(js_err)?;
    Ok(Float64Array::from(k.effective_weights().as_slice()))
}

/// Eigenvalues of the exact cell-integrated indicator matrix divided by
/// `dx^2`, ascending, followed by the value of `J` for one species.
#[wasm_bindgen]
pub fn counterexample_spectrum(cells: usize) -> Result<Float64Array, JsError> {
    let cert = verify_negative_direction(cells, &[vec![1.0]]).map_err(js_err)?;
    let exact = crossdiff::counterexample::build_exact_matrix(cells).map_err(js_err)?;
    let dx2 = exact.dx() * exact.dx();
    let mut out: Vec<f64> = exact
        .spectrum()
        .map_err(js_err)?
        .iter()
        .map(|l| l / dx2)
        .collect();
    out.push(cert.j_value);
    Ok(Float64Array::from(out.as_slice()))
}
