//! The waypoint action space across its expressivity spectrum: sampling,
//! factorized log-probabilities, decomposed entropy, and normalization.
//!
//! ```bash
//! cargo run --example action_spaces
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpnav::actionspace::{
    build_distance_head, build_offset_head, compose_waypoint, distance_head_width,
    offset_head_width, Categorical, ExpressivityConfig, HeadOutputs, TruncatedGaussian,
    WaypointAction, PANO_SIZE, SECTOR_COUNT,
};

fn random_heads(cfg: &ExpressivityConfig, rng: &mut ChaCha8Rng) -> HeadOutputs {
    let logits: Vec<f64> = (0..PANO_SIZE).map(|_| rng.random_range(-1.5..1.5)).collect();
    let pano = Categorical::from_logits(&logits).unwrap();
    let offsets = (0..SECTOR_COUNT)
        .map(|_| {
            let w = offset_head_width(cfg.offset_mode).max(1);
            let raw: Vec<f64> = (0..w).map(|_| rng.random_range(-1.5..1.5)).collect();
            build_offset_head(cfg.offset_mode, &raw).unwrap()
        })
        .collect();
    let distances = (0..SECTOR_COUNT)
        .map(|_| {
            let w = distance_head_width(cfg.distance_mode).max(1);
            let raw: Vec<f64> = (0..w).map(|_| rng.random_range(-1.5..1.5)).collect();
            build_distance_head(cfg.distance_mode, &raw).unwrap()
        })
        .collect();
    HeadOutputs::new(pano, offsets, distances).unwrap()
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    // A truncated Gaussian head on the distance range.
    let d = TruncatedGaussian::new(1.2, 0.8, 0.25, 4.0).unwrap();
    println!("truncated Gaussian on [0.25, 4.0] m with mu=1.2 sigma=0.8:");
    println!("  mean {:.4}  variance {:.4}  entropy {:.4}  mode {:.4}", d.mean(), d.variance(), d.entropy(), d.mode());
    let draws: Vec<f64> = (0..5).map(|_| d.sample(&mut rng)).collect();
    println!("  draws: {draws:.2?}  logpdf(1.0) = {:.4}", d.logpdf(1.0));

    println!("\nexpressivity spectrum (distance mode, offset mode):");
    for cfg in ExpressivityConfig::spectrum() {
        let heads = random_heads(&cfg, &mut rng);
        let action = heads.sample(&mut rng);
        let lp = heads.joint_logprob(&action);
        let (s_pano, s_off, s_dist) = heads.decomposed_entropy();
        let mode = heads.mode_action();
        print!("  {:<10}", cfg.code());
        match action {
            WaypointAction::Stop => print!(" sampled STOP"),
            WaypointAction::Move { sector, offset, distance } => {
                let (r, theta) = compose_waypoint(&action).unwrap();
                print!(
                    " sampled sector {sector:>2} offset {:+5.1}° r {distance:.2} m -> ({r:.2} m, {:.1}°)",
                    offset.to_degrees(),
                    theta.to_degrees()
                );
            }
        }
        println!("\n             logprob {lp:+.3}  S=({s_pano:.3}, {s_off:.3}, {s_dist:.3})  mode {mode:?}");
    }

    // The joint distribution normalizes: STOP mass plus sector masses, with
    // continuous heads integrated by quadrature.
    let cfg = ExpressivityConfig::wpn();
    let heads = random_heads(&cfg, &mut rng);
    let mut total = heads.pano.prob(12);
    for i in 0..SECTOR_COUNT {
        let quad = |lo: f64, hi: f64, f: &dyn Fn(f64) -> f64| {
            let n = 2000;
            let h = (hi - lo) / n as f64;
            let mut acc = f(lo) + f(hi);
            for k in 1..n {
                acc += f(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
            }
            acc * h / 3.0
        };
        let off_mass = match &heads.offsets[i] {
            wpnav::actionspace::Head::Continuous(d) => quad(d.lower, d.upper, &|x| d.pdf(x)),
            _ => 1.0,
        };
        let dist_mass = match &heads.distances[i] {
            wpnav::actionspace::Head::Continuous(d) => quad(d.lower, d.upper, &|x| d.pdf(x)),
            _ => 1.0,
        };
        total += heads.pano.prob(i) * off_mass * dist_mass;
    }
    println!("\njoint probability mass over the full action space: {total:.8}");
}
