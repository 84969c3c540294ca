use num_complex::Complex64;
use subprony::model::SampleSource;
use subprony::prony::{self, Backend};
use subprony::{presets, subnyquist};

#[test]
fn diag_table1_error_chain() {
    let model = presets::table1::<f64>();
    let mut scheme = presets::table1_scheme::<f64>();
    scheme.term_budget = 20;
    let mut src = SampleSource::noiseless(model.clone(), 1e-3);
    let analysis =
        prony::analyze_stride(&mut src, &scheme, 0, 11, Backend::Pencil, 1e-10, Some(20)).unwrap();
    let mut max_l = 0.0f64;
    let mut max_a = 0.0f64;
    for (lam, alf) in analysis.eigenvalues.iter().zip(analysis.coefficients.iter()) {
        let (dl, da) = model
            .terms()
            .iter()
            .map(|t| {
                (
                    (t.lambda(1e-3).powu(11) - lam).norm(),
                    (t.alpha() - alf).norm(),
                )
            })
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap();
        max_l = max_l.max(dl);
        max_a = max_a.max(da);
    }
    println!("max lambda^11 err = {max_l:e}, max alpha err = {max_a:e}");

    let lam_rho = subnyquist::shift_pair(&analysis, &mut src, &scheme, 0).unwrap();
    let mut max_p = 0.0f64;
    for (lam_r, lam_p) in analysis.eigenvalues.iter().zip(lam_rho.iter()) {
        let want: Complex64 = model
            .terms()
            .iter()
            .min_by(|a, b| {
                (a.lambda(1e-3).powu(11) - lam_r)
                    .norm()
                    .partial_cmp(&(b.lambda(1e-3).powu(11) - lam_r).norm())
                    .unwrap()
            })
            .map(|t| t.lambda(1e-3).powu(5))
            .unwrap();
        max_p = max_p.max((lam_p - want).norm());
    }
    println!("max lambda^5 err = {max_p:e}");
}
