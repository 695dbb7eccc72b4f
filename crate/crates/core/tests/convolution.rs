use gpdo_core::fourier;
use gpdo_core::quantizer::{convolve_direct, kernel_slice, op_apply};
use gpdo_core::repn::{HeisenbergDual, HeisenbergParams};
use gpdo_core::symbol::from_multiplier;
use gpdo_core::{Discretization, FrequencyGrid, GradedStructure, GroupGrid, SampledFunction, Symbol, C64};

fn reduced(points: usize) -> Discretization {
    let mut p = HeisenbergParams::ladder(0);
    p.truncation = 12;
    p.panels = 4;
    p.nodes_per_panel = 4;
    p.lambda_max = 5.0;
    p.sublaplacian_cutoff = Some(30.0);
    Discretization::new(
        GradedStructure::heisenberg1(),
        GroupGrid::cube(3, 4.0, points).unwrap(),
        FrequencyGrid::Heisenberg(HeisenbergDual::new(p).unwrap()),
    )
    .unwrap()
}

fn gaussian(g: &GroupGrid) -> SampledFunction {
    SampledFunction::from_fn(g, |x| C64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp(), 0.0))
}

// Op(sigma) f and f * kappa come from different pipelines: one applies the
// symbol frequency by frequency, the other sums the kernel over node pairs.
#[test]
fn convolution_agrees_with_quantization() {
    let d = reduced(13);
    let f = gaussian(&d.grid);
    let rt = fourier::inverse(&fourier::forward(&f, &d.dual).unwrap(), &d.grid, &d.dual)
        .unwrap()
        .rel_l2_error(&f)
        .unwrap();
    let sigma = from_multiplier(&|mu| (-0.5 * mu).exp(), &d.dual, -10.0).unwrap();
    let a = op_apply(&sigma, &f, &d).unwrap();
    let b = convolve_direct(&sigma, &f, &d).unwrap();
    let err = b.rel_l2_error(&a).unwrap();
    assert!(err <= 2.0 * rt.max(1e-3), "conv vs op {err:.3e}, roundtrip {rt:.3e}");
}

#[test]
fn identity_kernel_concentrates_under_refinement() {
    let grid = GroupGrid::cube(3, 2.0, 17).unwrap();
    let mut peaks = Vec::new();
    let mut outer = Vec::new();
    for refine in 0..2u8 {
        let d = Discretization::heisenberg(refine, 6.0).unwrap();
        let k = kernel_slice(&Symbol::identity(&d.dual), 0, &grid, &d).unwrap().kernel;
        let s = &d.structure;
        let (mut near, mut total) = (0.0, 0.0);
        for i in 0..grid.len() {
            let m = k.values[i].norm_sqr() * grid.weight(i);
            total += m;
            if s.homogeneous_norm(&gpdo_core::GroupElement::new(grid.coords(i))) <= 0.5 {
                near += m;
            }
        }
        peaks.push(k.sup_norm());
        outer.push(1.0 - near / total);
    }
    assert!(peaks[1] > peaks[0], "peak {peaks:?}");
    assert!(outer[1] < outer[0], "mass outside the unit half-ball {outer:?}");
}
