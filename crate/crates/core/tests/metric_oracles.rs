use deepfolio::data::{Month, RecessionCalendar};
use deepfolio::metrics::{cer_alpha_test, default_hac_lag, max_one_month_loss, moments, newey_west_variance, sharpe_ratio, Subsample};

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10
}

#[test]
fn moments_of_five_months() {
    // ×100: 1 2 3 4 10, mean 4, central moments 10, 36, 278.8
    let m = moments(&[0.01, 0.02, 0.03, 0.04, 0.10]).unwrap();
    assert!(close(m.mean, 4.0));
    assert!(close(m.sd, 12.5f64.sqrt()));
    assert!(close(m.skewness, 36.0 / 10f64.powf(1.5)));
    assert!(close(m.kurtosis, 2.788));
    assert!(moments(&[0.01; 5]).is_err());
}

#[test]
fn largest_monthly_loss() {
    assert!(close(max_one_month_loss(&[0.02, -0.031, 0.01, -0.004, 0.0]).unwrap(), 3.1));
    assert!(close(max_one_month_loss(&[0.02, 0.01, 0.03, 0.01, 0.02]).unwrap(), -1.0));
}

#[test]
fn hac_alpha_test_by_hand() {
    // d = .01 .03 −.01 .02 .05: mean .02, γ0 = 4e-4, γ1 = −.8e-4
    // S = γ0 + 2·(1/2)·γ1 = 3.2e-4, se = √(S/5) = .008, t = 2.5
    let model = [0.11, 0.13, 0.09, 0.12, 0.15];
    let bench = [0.10; 5];
    assert!(close(newey_west_variance(&[0.01, 0.03, -0.01, 0.02, 0.05], 1), 3.2e-4));
    let t = cer_alpha_test(&model, &bench, 1, 5).unwrap();
    assert!(close(t.estimate, 0.02));
    assert!((t.statistic - 2.5).abs() < 1e-9);
    assert!((t.p_value - 0.006209665325776132).abs() < 1e-9);
    assert_eq!(t.hac_lag, 1);
    assert!(cer_alpha_test(&model, &bench, 1, 10).is_err());
    assert_eq!(default_hac_lag(1), 2);
}

#[test]
fn sharpe_of_cash_and_of_a_flat_premium() {
    assert_eq!(sharpe_ratio(&[0.0; 5]).unwrap(), 0.0);
    assert!(sharpe_ratio(&[0.01; 5]).is_err());
    // mean .01, sample sd √(2.5e-4) over −.01 … .03
    let s = sharpe_ratio(&[-0.01, 0.0, 0.01, 0.02, 0.03]).unwrap();
    assert!(close(s, 0.01 / 2.5e-4f64.sqrt()));
}

#[test]
fn subsample_membership() {
    let cal = RecessionCalendar::nber();
    let m = |y, mo| Month::new(y, mo).unwrap();
    assert!(Subsample::Recession.contains(m(2008, 12), &cal));
    assert!(Subsample::Expansion.contains(m(2010, 1), &cal));
    assert!(Subsample::Decade(1980).contains(m(1989, 12), &cal));
    assert!(!Subsample::Decade(1980).contains(m(1990, 1), &cal));
    assert!(Subsample::Full.contains(m(1950, 6), &cal));
    assert_eq!(Subsample::Decade(1980).to_string(), "1980s");
}
