//! Rigid spheres: force/torque accumulation, semi-implicit Euler integration
//! and an inelastic non-penetration contact response. All state is stored in
//! lattice units.

use std::f64::consts::PI;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kinematics {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub angular_velocity: [f64; 3],
}

impl Kinematics {
    /// Rigid-body velocity U + W × (x − x_C), with `r` = x − x_C.
    #[inline]
    pub fn velocity_at_offset(&self, r: [f64; 3]) -> [f64; 3] {
        let w = self.angular_velocity;
        let u = self.velocity;
        [
            u[0] + w[1] * r[2] - w[2] * r[1],
            u[1] + w[2] * r[0] - w[0] * r[2],
            u[2] + w[0] * r[1] - w[1] * r[0],
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidBody {
    pub uid: u32,
    pub kin: Kinematics,
    /// State before the most recent integration step.
    pub prev: Kinematics,
    pub radius: f64,
    pub density: f64,
    pub mass: f64,
    pub inertia: f64,
    pub force: [f64; 3],
    pub torque: [f64; 3],
    /// Constant non-electric force added every step.
    pub external_force: [f64; 3],
    /// Total charge in lattice units (0 for uncharged bodies).
    pub charge: f64,
    /// Surface potential in volts, for bodies that carry a potential boundary.
    pub zeta: Option<f64>,
    pub fixed: bool,
}

impl RigidBody {
    pub fn sphere(uid: u32, position: [f64; 3], radius: f64, density: f64) -> Self {
        let mass = density * 4.0 / 3.0 * PI * radius.powi(3);
        let kin = Kinematics {
            position,
            velocity: [0.0; 3],
            angular_velocity: [0.0; 3],
        };
        Self {
            uid,
            kin,
            prev: kin,
            radius,
            density,
            mass,
            inertia: 0.4 * mass * radius * radius,
            force: [0.0; 3],
            torque: [0.0; 3],
            external_force: [0.0; 3],
            charge: 0.0,
            zeta: None,
            fixed: false,
        }
    }

    pub fn accumulate(&mut self, force: [f64; 3], torque: [f64; 3]) {
        for a in 0..3 {
            self.force[a] += force[a];
            self.torque[a] += torque[a];
        }
    }

    pub fn inverse_mass(&self) -> f64 {
        if self.fixed {
            0.0
        } else {
            1.0 / self.mass
        }
    }
}

/// Semi-implicit Euler step; clears the accumulators of every body.
pub fn integrate(bodies: &mut [RigidBody], dt: f64) {
    for b in bodies {
        b.prev = b.kin;
        if !b.fixed {
            for a in 0..3 {
                b.kin.velocity[a] += b.force[a] / b.mass * dt;
                b.kin.position[a] += b.kin.velocity[a] * dt;
                b.kin.angular_velocity[a] += b.torque[a] / b.inertia * dt;
            }
        }
        b.force = [0.0; 3];
        b.torque = [0.0; 3];
    }
}

/// Geometry the contact model and position wrapping need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Walls {
    pub extent: [f64; 3],
    pub periodic: [bool; 3],
}

impl Walls {
    /// Separation vector b − a under the minimum-image convention.
    pub fn separation(&self, a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|k| {
            let mut d = b[k] - a[k];
            if self.periodic[k] {
                let l = self.extent[k];
                d -= l * (d / l).round();
            }
            d
        })
    }

    pub fn wrap(&self, p: &mut [f64; 3]) {
        for k in 0..3 {
            if self.periodic[k] {
                p[k] = p[k].rem_euclid(self.extent[k]);
            }
        }
    }
}

/// Wraps body positions into the domain along periodic axes.
pub fn wrap_periodic(bodies: &mut [RigidBody], walls: &Walls) {
    for b in bodies {
        walls.wrap(&mut b.kin.position);
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Projects overlapping spheres apart (split by inverse mass) and removes the
/// closing normal velocity. Returns the number of contacts treated.
pub fn resolve_contacts(bodies: &mut [RigidBody], walls: &Walls) -> usize {
    let mut contacts = 0;
    for i in 0..bodies.len() {
        for j in i + 1..bodies.len() {
            let d = walls.separation(bodies[i].kin.position, bodies[j].kin.position);
            let dist = norm(d);
            let overlap = bodies[i].radius + bodies[j].radius - dist;
            let (mi, mj) = (bodies[i].inverse_mass(), bodies[j].inverse_mass());
            if overlap <= 0.0 || dist == 0.0 || mi + mj == 0.0 {
                continue;
            }
            contacts += 1;
            let n = d.map(|v| v / dist);
            let (si, sj) = (overlap * mi / (mi + mj), overlap * mj / (mi + mj));
            let vrel: f64 = (0..3)
                .map(|a| (bodies[j].kin.velocity[a] - bodies[i].kin.velocity[a]) * n[a])
                .sum();
            let impulse = if vrel < 0.0 { -vrel / (mi + mj) } else { 0.0 };
            for a in 0..3 {
                bodies[i].kin.position[a] -= n[a] * si;
                bodies[j].kin.position[a] += n[a] * sj;
                bodies[i].kin.velocity[a] -= impulse * mi * n[a];
                bodies[j].kin.velocity[a] += impulse * mj * n[a];
            }
        }
    }
    for b in bodies.iter_mut().filter(|b| !b.fixed) {
        for a in 0..3 {
            if walls.periodic[a] {
                continue;
            }
            let lo = b.radius - b.kin.position[a];
            let hi = b.kin.position[a] + b.radius - walls.extent[a];
            if lo > 0.0 {
                contacts += 1;
                b.kin.position[a] += lo;
                b.kin.velocity[a] = b.kin.velocity[a].max(0.0);
            } else if hi > 0.0 {
                contacts += 1;
                b.kin.position[a] -= hi;
                b.kin.velocity[a] = b.kin.velocity[a].min(0.0);
            }
        }
    }
    contacts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const OPEN: Walls = Walls {
        extent: [1000.0; 3],
        periodic: [false; 3],
    };

    #[test]
    fn accumulate_cancels_and_sums() {
        let mut b = RigidBody::sphere(1, [0.0; 3], 4.0, 1.0);
        b.accumulate([1.0, 2.0, 3.0], [0.0; 3]);
        b.accumulate([-1.0, -2.0, -3.0], [0.0; 3]);
        assert_eq!(b.force, [0.0; 3]);
        b.accumulate([0.5, 0.0, 0.0], [0.0; 3]);
        b.accumulate([0.25, 0.0, 0.0], [0.0, 0.0, 1.0]);
        assert_eq!(b.force, [0.75, 0.0, 0.0]);
        assert_eq!(b.torque, [0.0, 0.0, 1.0]);
    }

    #[test]
    fn constant_force_step() {
        let mut b = vec![RigidBody::sphere(1, [10.0; 3], 4.0, 1.2)];
        let m = b[0].mass;
        b[0].accumulate([2.0, 0.0, 0.0], [0.0; 3]);
        integrate(&mut b, 1.0);
        assert_relative_eq!(b[0].kin.velocity[0], 2.0 / m);
        assert_relative_eq!(b[0].kin.position[0], 10.0 + 2.0 / m);
        assert_eq!(b[0].force, [0.0; 3]);
        assert_eq!(b[0].prev.position, [10.0; 3]);
    }

    #[test]
    fn physical_mass() {
        // R = 30 nm, ρ_p = 1195 kg/m³
        let b = RigidBody::sphere(1, [0.0; 3], 30e-9, 1195.0);
        assert_relative_eq!(b.mass, 1.351e-19, max_relative = 1e-3);
        assert_relative_eq!(b.inertia, 0.4 * b.mass * 9e-16);
    }

    #[test]
    fn fixed_bodies_do_not_move() {
        let mut b = vec![RigidBody::sphere(1, [10.0; 3], 4.0, 1.2)];
        b[0].fixed = true;
        b[0].accumulate([2.0, 0.0, 0.0], [1.0; 3]);
        integrate(&mut b, 1.0);
        assert_eq!(b[0].kin.position, [10.0; 3]);
        assert_eq!(b[0].force, [0.0; 3]);
    }

    #[test]
    fn pair_contact() {
        let mut b = vec![
            RigidBody::sphere(1, [10.0, 10.0, 10.0], 4.0, 1.0),
            RigidBody::sphere(1, [17.0, 10.0, 10.0], 4.0, 1.0),
        ];
        b[0].kin.velocity = [0.1, 0.0, 0.0];
        b[1].kin.velocity = [-0.1, 0.02, 0.0];
        assert_eq!(resolve_contacts(&mut b, &OPEN), 1);
        assert_relative_eq!(b[0].kin.position[0], 9.5);
        assert_relative_eq!(b[1].kin.position[0], 17.5);
        assert_relative_eq!(b[0].kin.velocity[0], b[1].kin.velocity[0]);
        assert_relative_eq!(b[1].kin.velocity[1], 0.02);
        // separated now
        assert_eq!(resolve_contacts(&mut b, &OPEN), 0);
    }

    #[test]
    fn gap_is_noop() {
        let mut b = vec![
            RigidBody::sphere(1, [10.0, 10.0, 10.0], 4.0, 1.0),
            RigidBody::sphere(1, [18.5, 10.0, 10.0], 4.0, 1.0),
        ];
        let before = b.clone();
        assert_eq!(resolve_contacts(&mut b, &OPEN), 0);
        assert_eq!(before, b);
    }

    #[test]
    fn wall_contact() {
        let mut b = vec![RigidBody::sphere(1, [3.0, 50.0, 50.0], 4.0, 1.0)];
        b[0].kin.velocity = [-0.1, 0.0, 0.0];
        resolve_contacts(&mut b, &OPEN);
        assert_eq!(b[0].kin.position[0], 4.0);
        assert_eq!(b[0].kin.velocity[0], 0.0);
    }

    #[test]
    fn scaling_lattice_has_no_contacts() {
        let walls = Walls {
            extent: [144.0; 3],
            periodic: [false, true, false],
        };
        let mut b = Vec::new();
        for k in 0..4 {
            for j in 0..4 {
                for i in 0..4 {
                    let p = [19.0 + 36.0 * i as f64, 19.0 + 36.0 * j as f64, 19.0 + 36.0 * k as f64];
                    b.push(RigidBody::sphere(1, p, 6.0, 1.195));
                }
            }
        }
        assert_eq!(resolve_contacts(&mut b, &walls), 0);
    }

    proptest! {
        #[test]
        fn free_flight_conserves_energy(vx in -0.1f64..0.1, vy in -0.1f64..0.1, steps in 1usize..200) {
            let mut b = vec![RigidBody::sphere(1, [0.0; 3], 4.0, 1.0)];
            b[0].kin.velocity = [vx, vy, 0.0];
            let e0 = vx * vx + vy * vy;
            for _ in 0..steps {
                integrate(&mut b, 1.0);
            }
            let v = b[0].kin.velocity;
            prop_assert_eq!(v[0] * v[0] + v[1] * v[1] + v[2] * v[2], e0);
        }

        #[test]
        fn contacts_reduce_overlap(dx in 0.5f64..7.9, dy in -3.0f64..3.0, m2 in 0.5f64..2.0) {
            let mut b = vec![
                RigidBody::sphere(1, [50.0, 50.0, 50.0], 4.0, 1.0),
                RigidBody::sphere(1, [50.0 + dx, 50.0 + dy, 50.0], 4.0, m2),
            ];
            let gap = |b: &[RigidBody]| 8.0 - norm(OPEN.separation(b[0].kin.position, b[1].kin.position));
            let before = gap(&b);
            resolve_contacts(&mut b, &OPEN);
            prop_assert!(gap(&b) <= before.max(0.0) + 1e-12);
            prop_assert!(gap(&b) <= 1e-9);
        }

        #[test]
        fn accumulation_order_irrelevant_for_exact_sums(fs in proptest::collection::vec(-1000i32..1000, 1..20)) {
            let mut a = RigidBody::sphere(1, [0.0; 3], 4.0, 1.0);
            let mut r = a.clone();
            for f in &fs {
                a.accumulate([*f as f64 * 0.25, 0.0, 0.0], [0.0; 3]);
            }
            for f in fs.iter().rev() {
                r.accumulate([*f as f64 * 0.25, 0.0, 0.0], [0.0; 3]);
            }
            prop_assert_eq!(a.force, r.force);
        }
    }
}
