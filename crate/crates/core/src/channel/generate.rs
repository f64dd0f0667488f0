use std::f64::consts::PI;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{
    build_pdp, split_specular_diffuse, ArrayGeometry, ChannelSet, PowerDelayProfile,
    ScenarioParams, SPEED_OF_LIGHT_M_PER_NS,
};
use crate::error::{Error, Result};
use crate::Real;

/// Room extent (x, y, z) in metres; the array hangs at the ceiling centre.
pub const ROOM_DIMENSIONS_M: [f64; 3] = [5.0, 5.0, 3.0];
pub const SUBRAYS_PER_TAP: usize = 8;
/// Spread of the diffuse sub-scatterers around each tap's scatterer.
pub const SUBSCATTERER_RADIUS_M: f64 = 0.05;
const MIN_RECEIVER_DISTANCE_M: f64 = 0.5;

/// Deterministic per-realization seed derived from a master seed.
pub fn substream_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    mix(master ^ mix(index.wrapping_add(0x9e37_79b9_7f4a_7c15)))
}

/// Scatterer responsible for one delay tap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScattererLayout {
    pub position: [f64; 3],
    pub specular_power: f64,
    pub diffuse_power: f64,
    /// Offsets of the diffuse sub-scatterers, as unit vectors.
    pub subray_directions: Vec<[f64; 3]>,
    /// Path delay in excess of the direct array-receiver distance, ns.
    pub excess_delay_ns: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UserGeometry {
    pub receiver: [f64; 3],
    pub taps: Vec<ScattererLayout>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneGeometry {
    pub array_center: [f64; 3],
    /// Rotation of the array about the vertical axis.
    pub orientation_rad: f64,
    pub users: Vec<UserGeometry>,
}

impl SceneGeometry {
    /// Absolute element positions after rotation and translation.
    pub fn element_positions(&self, array: &ArrayGeometry) -> Vec<[f64; 3]> {
        let (s, c) = self.orientation_rad.sin_cos();
        array
            .element_positions()
            .into_iter()
            .map(|[x, y, z]| {
                [
                    self.array_center[0] + c * x - s * y,
                    self.array_center[1] + s * x + c * y,
                    self.array_center[2] + z,
                ]
            })
            .collect()
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

fn unit_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let r = (1.0 - z * z).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex<f64> {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(re * s, im * s)
}

/// Point on the prolate spheroid with foci `a` and `b` whose focal
/// distances sum to `total`, roughly uniform over its surface and kept
/// below the ceiling when possible.
fn point_on_spheroid<R: Rng + ?Sized>(a: [f64; 3], b: [f64; 3], total: f64, rng: &mut R) -> [f64; 3] {
    let axis_vec = sub(b, a);
    let focal = norm(axis_vec);
    let axis = [axis_vec[0] / focal, axis_vec[1] / focal, axis_vec[2] / focal];
    let centre = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0];
    let semi_major = total / 2.0;
    let semi_minor = ((total * total - focal * focal).max(0.0)).sqrt() / 2.0;
    // Orthonormal frame around the axis.
    let helper = if axis[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = {
        let d = dot(helper, axis);
        let v = [helper[0] - d * axis[0], helper[1] - d * axis[1], helper[2] - d * axis[2]];
        let n = norm(v);
        [v[0] / n, v[1] / n, v[2] / n]
    };
    let e2 = [
        axis[1] * e1[2] - axis[2] * e1[1],
        axis[2] * e1[0] - axis[0] * e1[2],
        axis[0] * e1[1] - axis[1] * e1[0],
    ];
    let mut p = centre;
    for _ in 0..64 {
        let z: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let rho = semi_minor * (1.0 - z * z).sqrt();
        let (s, c) = phi.sin_cos();
        for i in 0..3 {
            p[i] = centre[i] + semi_major * z * axis[i] + rho * (c * e1[i] + s * e2[i]);
        }
        if p[2] <= ROOM_DIMENSIONS_M[2] {
            break;
        }
    }
    p
}

/// Draws array pose, receivers and per-tap scatterers.
///
/// Tap `l` is served by a scatterer on the spheroid whose foci are the
/// array centroid and the receiver, at an excess delay drawn uniformly in
/// `[l - 1/2, l + 1/2)` sample periods (clipped at zero).
pub fn draw_scene<R: Rng + ?Sized>(
    scenario: &ScenarioParams,
    pdp: &PowerDelayProfile,
    num_users: usize,
    rng: &mut R,
) -> Result<SceneGeometry> {
    if num_users == 0 {
        return Err(Error::InvalidArgument("at least one user is required".into()));
    }
    if pdp.taps.len() != scenario.num_taps {
        return Err(Error::InvalidArgument("profile length does not match scenario".into()));
    }
    let array_center = [ROOM_DIMENSIONS_M[0] / 2.0, ROOM_DIMENSIONS_M[1] / 2.0, ROOM_DIMENSIONS_M[2]];
    let orientation_rad = rng.random_range(0.0..2.0 * PI);

    let mut users = Vec::with_capacity(num_users);
    for _ in 0..num_users {
        let receiver = loop {
            let p = [
                rng.random_range(0.0..ROOM_DIMENSIONS_M[0]),
                rng.random_range(0.0..ROOM_DIMENSIONS_M[1]),
                rng.random_range(0.0..ROOM_DIMENSIONS_M[2]),
            ];
            if norm(sub(p, array_center)) >= MIN_RECEIVER_DISTANCE_M {
                break p;
            }
        };
        let direct = norm(sub(array_center, receiver));

        let mut taps = Vec::with_capacity(scenario.num_taps);
        for (l, &power) in pdp.taps.iter().enumerate() {
            let lo = (l as f64 - 0.5).max(0.0);
            let excess_delay_ns = rng.random_range(lo..l as f64 + 0.5) * scenario.sample_period_ns;
            let total = direct + excess_delay_ns * SPEED_OF_LIGHT_M_PER_NS;
            let position = point_on_spheroid(array_center, receiver, total, rng);
            let (specular_power, diffuse_power) = if power > 0.0 {
                split_specular_diffuse(scenario.nakagami_m, power)?
            } else {
                (0.0, 0.0)
            };
            let subray_directions = (0..SUBRAYS_PER_TAP).map(|_| unit_vector(rng)).collect();
            taps.push(ScattererLayout {
                position,
                specular_power,
                diffuse_power,
                subray_directions,
                excess_delay_ns,
            });
        }
        users.push(UserGeometry { receiver, taps });
    }
    Ok(SceneGeometry {
        array_center,
        orientation_rad,
        users,
    })
}

/// Draws one channel realization from a ChaCha20 stream keyed by `seed`.
///
/// With `correlated == false` every tap is an independent Nakagami variate
/// (gamma-distributed power, uniform phase). Otherwise each tap is a
/// specular ray from its scatterer plus [`SUBRAYS_PER_TAP`] complex Gaussian
/// rays from nearby sub-scatterers, so antennas see a shared geometry.
pub fn generate_channel_set<T: Real>(
    scenario: &ScenarioParams,
    array: &ArrayGeometry,
    num_users: usize,
    correlated: bool,
    seed: u64,
) -> Result<ChannelSet<T>> {
    let pdp = build_pdp(scenario)?;
    if num_users == 0 {
        return Err(Error::InvalidArgument("at least one user is required".into()));
    }
    let m_ant = array.num_elements();
    let l_taps = scenario.num_taps;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let zero = Complex::new(T::zero(), T::zero());
    let mut taps = vec![zero; m_ant * num_users * l_taps];
    let idx = |m: usize, n: usize, t: usize| (m * num_users + n) * l_taps + t;

    if !correlated {
        let m = scenario.nakagami_m;
        let gammas = pdp
            .taps
            .iter()
            .map(|&a| {
                if a > 0.0 {
                    Gamma::new(m, a / m).map(Some).map_err(|e| Error::Config(e.to_string()))
                } else {
                    Ok(None)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        for ant in 0..m_ant {
            for n in 0..num_users {
                for (t, g) in gammas.iter().enumerate() {
                    if let Some(g) = g {
                        let power: f64 = g.sample(&mut rng);
                        let phase: f64 = rng.random_range(0.0..2.0 * PI);
                        let h = Complex::from_polar(power.sqrt(), phase);
                        taps[idx(ant, n, t)] = Complex::new(T::cast(h.re), T::cast(h.im));
                    }
                }
            }
        }
    } else {
        let scene = draw_scene(scenario, &pdp, num_users, &mut rng)?;
        let elements = scene.element_positions(array);
        let k_wave = 2.0 * PI / scenario.carrier_wavelength_m;
        for (n, user) in scene.users.iter().enumerate() {
            for (t, layout) in user.taps.iter().enumerate() {
                if layout.specular_power == 0.0 && layout.diffuse_power == 0.0 {
                    continue;
                }
                let specular = Complex::from_polar(
                    layout.specular_power.sqrt(),
                    rng.random_range(0.0..2.0 * PI),
                );
                let rays: Vec<([f64; 3], Complex<f64>)> = layout
                    .subray_directions
                    .iter()
                    .map(|u| {
                        let p = [
                            layout.position[0] + SUBSCATTERER_RADIUS_M * u[0],
                            layout.position[1] + SUBSCATTERER_RADIUS_M * u[1],
                            layout.position[2] + SUBSCATTERER_RADIUS_M * u[2],
                        ];
                        let c = complex_gaussian(
                            &mut rng,
                            layout.diffuse_power / SUBRAYS_PER_TAP as f64,
                        );
                        (p, c)
                    })
                    .collect();
                for (ant, &e) in elements.iter().enumerate() {
                    let d = norm(sub(e, layout.position));
                    let mut h = specular * Complex::from_polar(1.0, -k_wave * d);
                    for &(p, c) in &rays {
                        h += c * Complex::from_polar(1.0, -k_wave * norm(sub(e, p)));
                    }
                    taps[idx(ant, n, t)] = Complex::new(T::cast(h.re), T::cast(h.im));
                }
            }
        }
    }

    ChannelSet::from_taps(m_ant, num_users, taps, scenario.clone(), correlated, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Scenario;

    #[test]
    fn scatterer_delays_match_tap_index() {
        let s = ScenarioParams::new(Scenario::ConferenceRoom);
        let pdp = build_pdp(&s).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let scene = draw_scene(&s, &pdp, 3, &mut rng).unwrap();
        for user in &scene.users {
            let direct = norm(sub(scene.array_center, user.receiver));
            for (l, tap) in user.taps.iter().enumerate() {
                let path = norm(sub(tap.position, scene.array_center))
                    + norm(sub(user.receiver, tap.position));
                let delay = (path - direct) / SPEED_OF_LIGHT_M_PER_NS / s.sample_period_ns;
                assert!((delay - l as f64).abs() <= 0.5 + 1e-9, "tap {l}: {delay}");
                assert!(tap.position[2] <= scene.array_center[2] + 1e-12);
            }
        }
    }

    #[test]
    fn substreams_differ() {
        assert_ne!(substream_seed(1, 0), substream_seed(1, 1));
        assert_ne!(substream_seed(1, 0), substream_seed(2, 0));
        assert_eq!(substream_seed(5, 9), substream_seed(5, 9));
    }
}
