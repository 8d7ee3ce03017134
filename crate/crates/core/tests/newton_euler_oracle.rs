//! Compares the reduced swarm model with a maximal-coordinate Newton-Euler
//! solve in which every cable tension is an explicit unknown.

use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use swarmsling::geometry::{exp_so3, hat};
use swarmsling::quadrotor::{QuadrotorParams, WrenchCommand};
use swarmsling::swarm_dynamics::{
    swarm_derivatives, LinkSpec, LinkState, PayloadParams, QuadAttitude, SwarmInput, SwarmParams, SwarmState,
};
use swarmsling::{Mat3, Vec3, GRAVITY};

/// Accelerations from Newton-Euler with tensions: payload `a0`, `Ω̇0`, and
/// each cable's `ω̇ᵢ`.
fn oracle(s: &SwarmState, u: &SwarmInput, p: &SwarmParams) -> (Vec3, Vec3, Vec<Vec3>) {
    let n = s.n();
    let g = p.gravity * Vec3::z();
    let dim = 6 + 4 * n;
    let mut a = DMatrix::<f64>::zeros(dim, dim);
    let mut b = DVector::<f64>::zeros(dim);
    // unknowns: a0 (0..3), Ω̇0 (3..6), aᵢ (6+3i..), Tᵢ (6+3n+i)
    let t_col = |i: usize| 6 + 3 * n + i;
    let (m0, j0) = (p.payload.mass, p.payload.inertia);
    let w0 = s.omega0;

    // payload translation: m0 a0 + Σ Tᵢ qᵢ = m0 g
    for k in 0..3 {
        a[(k, k)] = m0;
        b[k] = m0 * g[k];
    }
    // payload rotation: J0 Ω̇0 + Σ Tᵢ ρᵢ × (R0ᵀ qᵢ) = −Ω0 × J0 Ω0
    let gyro = -w0.cross(&(j0 * w0));
    for r in 0..3 {
        for c in 0..3 {
            a[(3 + r, 3 + c)] = j0[(r, c)];
        }
        b[3 + r] = gyro[r];
    }
    for i in 0..n {
        let q = s.links[i].q;
        let w = s.links[i].omega;
        let (rho, l) = (p.links[i].rho, p.links[i].length);
        let mi = p.quads[i].mass;
        let ui = u.force(i, &s.quads[i].r);
        let torque_dir = rho.cross(&(s.r0.transpose() * q));
        for k in 0..3 {
            a[(k, t_col(i))] = q[k];
            a[(3 + k, t_col(i))] = torque_dir[k];
        }
        // vehicle: mᵢ aᵢ − Tᵢ qᵢ = mᵢ g + uᵢ
        let row = 6 + 3 * i;
        for k in 0..3 {
            a[(row + k, row + k)] = mi;
            a[(row + k, t_col(i))] = -q[k];
            b[row + k] = mi * g[k] + ui[k];
        }
        // cable: d·d̈ = −‖ḋ‖² with d = l q and d̈ = a0 − R0 ρ̂ Ω̇0 + R0 Ω̂0² ρ − aᵢ
        let d = l * q;
        let ddot_sq = (l * w.cross(&q)).norm_squared();
        let coupling = -(s.r0 * hat(&rho)).transpose() * d;
        let centripetal = s.r0 * hat(&w0) * hat(&w0) * rho;
        let row = t_col(i);
        for k in 0..3 {
            a[(row, k)] = d[k];
            a[(row, 3 + k)] = coupling[k];
            a[(row, 6 + 3 * i + k)] = -d[k];
        }
        b[row] = -ddot_sq - d.dot(&centripetal);
    }
    let x = a.lu().solve(&b).expect("oracle system is nonsingular");
    let a0 = Vec3::new(x[0], x[1], x[2]);
    let w0_dot = Vec3::new(x[3], x[4], x[5]);
    let links = (0..n)
        .map(|i| {
            let q = s.links[i].q;
            let (rho, l) = (p.links[i].rho, p.links[i].length);
            let ai = Vec3::new(x[6 + 3 * i], x[7 + 3 * i], x[8 + 3 * i]);
            let ddot = a0 - s.r0 * hat(&rho) * w0_dot + s.r0 * hat(&w0) * hat(&w0) * rho - ai;
            q.cross(&ddot) / l
        })
        .collect();
    (a0, w0_dot, links)
}

fn unit(rng: &mut StdRng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn small(rng: &mut StdRng, scale: f64) -> Vec3 {
    Vec3::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale), rng.gen_range(-scale..scale))
}

/// Random state with cables hanging mostly downward from the payload.
fn random_case(rng: &mut StdRng, n: usize) -> (SwarmState, SwarmInput, SwarmParams) {
    let dims = Vec3::new(1.0, 0.8, 0.2);
    let payload = PayloadParams {
        inertia: PayloadParams::solid_box(1.5, dims).inertia + Mat3::from_diagonal(&small(rng, 0.02).abs()),
        ..PayloadParams::solid_box(rng.gen_range(0.5..3.0), dims)
    };
    let quads: Vec<QuadrotorParams> = (0..n)
        .map(|_| QuadrotorParams { mass: rng.gen_range(0.3..1.5), ..QuadrotorParams::default() })
        .collect();
    let links: Vec<LinkSpec> = (0..n)
        .map(|_| {
            let rho = Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.4..0.4), -0.1);
            LinkSpec::new(rho, rng.gen_range(0.5..2.0))
        })
        .collect();
    let params = SwarmParams { payload, quads, links, gravity: GRAVITY };

    let link_states = (0..n)
        .map(|_| {
            let q = (Vec3::z() + 0.5 * unit(rng)).normalize();
            let raw = small(rng, 1.0);
            LinkState { q, omega: raw - q * q.dot(&raw) }
        })
        .collect();
    let quad_states = (0..n)
        .map(|_| QuadAttitude { r: exp_so3(&small(rng, 0.4)), omega: small(rng, 0.5) })
        .collect();
    let state = SwarmState {
        x0: small(rng, 2.0),
        v0: small(rng, 1.0),
        r0: exp_so3(&small(rng, 0.6)),
        omega0: small(rng, 1.0),
        links: link_states,
        quads: quad_states,
    };
    let commands = (0..n).map(|_| WrenchCommand::new(rng.gen_range(2.0..15.0), small(rng, 0.1))).collect();
    (state, SwarmInput { commands }, params)
}

fn assert_matches(s: &SwarmState, u: &SwarmInput, p: &SwarmParams, tol: f64) {
    let d = swarm_derivatives(s, u, p).unwrap();
    let (a0, w0_dot, links) = oracle(s, u, p);
    let scale = 1.0 + a0.norm() + w0_dot.norm();
    assert!((d.v0_dot - a0).norm() <= tol * scale, "a0 {} vs {}", d.v0_dot, a0);
    assert!((d.omega0_dot - w0_dot).norm() <= tol * scale, "Ω̇0 {} vs {}", d.omega0_dot, w0_dot);
    for ((_, w_dot), w_ref) in d.links.iter().zip(&links) {
        assert!((w_dot - w_ref).norm() <= tol * (1.0 + w_ref.norm()), "ω̇ {w_dot} vs {w_ref}");
    }
}

#[test]
fn random_asymmetric_states_agree() {
    let mut rng = StdRng::seed_from_u64(7);
    for n in [1, 2, 3, 4, 6] {
        for _ in 0..40 {
            let (s, u, p) = random_case(&mut rng, n);
            assert_matches(&s, &u, &p, 1e-9);
        }
    }
}

#[test]
fn three_vehicle_hover_scenario_agrees() {
    let reference = [[-0.2309, 0.4, -0.1], [-0.2309, -0.4, -0.1], [0.4619, 0.0, -0.1]];
    let links = reference.iter().map(|&r| LinkSpec::new(Vec3::from(r), 1.0)).collect();
    let p = SwarmParams::homogeneous(PayloadParams::default(), QuadrotorParams::default(), links);
    let mut rng = StdRng::seed_from_u64(11);
    let (mut s, u, _) = random_case(&mut rng, 3);
    s.x0 = Vec3::zeros();
    assert_matches(&s, &u, &p, 1e-10);
    let hover = SwarmState::hover(Vec3::zeros(), 3);
    assert_matches(&hover, &swarmsling::swarm_dynamics::hover_inputs(&p), &p, 1e-10);
}
