use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cloud::{normalize_unit_cube, Point3, PointCloud};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Cube,
    Box,
    Fold,
    Stairs,
    Sphere,
}

impl Shape {
    pub const ALL: [Shape; 5] = [
        Shape::Cube,
        Shape::Box,
        Shape::Fold,
        Shape::Stairs,
        Shape::Sphere,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Cube => "cube",
            Shape::Box => "box",
            Shape::Fold => "fold",
            Shape::Stairs => "stairs",
            Shape::Sphere => "sphere",
        }
    }
}

/// Parallelogram `origin + a u + b v` for `a, b` in `[0, 1]`.
struct Face {
    origin: Point3,
    u: Point3,
    v: Point3,
}

impl Face {
    fn area(&self) -> f64 {
        let (u, v) = (self.u, self.v);
        let c = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt()
    }

    fn at(&self, a: f64, b: f64) -> Point3 {
        std::array::from_fn(|i| self.origin[i] + a * self.u[i] + b * self.v[i])
    }
}

fn box_faces(d: Point3) -> Vec<Face> {
    let [x, y, z] = d;
    let f = |origin, u, v| Face { origin, u, v };
    vec![
        f([0.0, 0.0, 0.0], [x, 0.0, 0.0], [0.0, y, 0.0]),
        f([0.0, 0.0, z], [x, 0.0, 0.0], [0.0, y, 0.0]),
        f([0.0, 0.0, 0.0], [x, 0.0, 0.0], [0.0, 0.0, z]),
        f([0.0, y, 0.0], [x, 0.0, 0.0], [0.0, 0.0, z]),
        f([0.0, 0.0, 0.0], [0.0, y, 0.0], [0.0, 0.0, z]),
        f([x, 0.0, 0.0], [0.0, y, 0.0], [0.0, 0.0, z]),
    ]
}

fn faces(shape: Shape, rng: &mut ChaCha8Rng) -> Vec<Face> {
    match shape {
        Shape::Cube => box_faces([1.0; 3]),
        Shape::Box => box_faces(std::array::from_fn(|_| rng.random_range(0.3..1.0))),
        Shape::Fold => {
            let angle = rng.random_range(60f64..120.0).to_radians();
            let w = [0.0, 0.0, 1.0];
            vec![
                Face {
                    origin: [0.0; 3],
                    u: [1.0, 0.0, 0.0],
                    v: w,
                },
                Face {
                    origin: [0.0; 3],
                    u: [angle.cos(), angle.sin(), 0.0],
                    v: w,
                },
            ]
        }
        Shape::Stairs => {
            let steps = rng.random_range(3..=5);
            let (run, rise) = (1.0 / steps as f64, rng.random_range(0.1..0.3));
            let w = [0.0, 0.0, 1.0];
            (0..steps)
                .flat_map(|s| {
                    let (x, y) = (s as f64 * run, s as f64 * rise);
                    [
                        Face {
                            origin: [x, y, 0.0],
                            u: [0.0, rise, 0.0],
                            v: w,
                        },
                        Face {
                            origin: [x, y + rise, 0.0],
                            u: [run, 0.0, 0.0],
                            v: w,
                        },
                    ]
                })
                .collect()
        }
        Shape::Sphere => Vec::new(),
    }
}

fn gaussian3(rng: &mut ChaCha8Rng) -> Point3 {
    std::array::from_fn(|_| StandardNormal.sample(rng))
}

fn unit(v: Point3) -> Point3 {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|c| c / n)
}

/// Uniformly random rotation from a random unit quaternion.
fn random_rotation(rng: &mut ChaCha8Rng) -> [[f64; 3]; 3] {
    let g: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
    let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [w, x, y, z] = g.map(|v| v / n);
    [
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]
}

/// `n` points spread uniformly by area over a randomly posed shape, scaled
/// into the unit cube.
pub fn synthetic_cloud(shape: Shape, n: usize, seed: u64) -> Result<PointCloud> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs = faces(shape, &mut rng);
    let total: f64 = fs.iter().map(Face::area).sum();
    let rot = random_rotation(&mut rng);
    let pts: Vec<Point3> = (0..n)
        .map(|_| {
            let p = if fs.is_empty() {
                unit(gaussian3(&mut rng))
            } else {
                let mut t = rng.random::<f64>() * total;
                let face = fs
                    .iter()
                    .find(|f| {
                        t -= f.area();
                        t < 0.0
                    })
                    .unwrap_or(&fs[fs.len() - 1]);
                face.at(rng.random(), rng.random())
            };
            std::array::from_fn(|r| (0..3).map(|c| rot[r][c] * p[c]).sum())
        })
        .collect();
    Ok(normalize_unit_cube(&PointCloud::new(pts)?)?.0)
}

/// `clouds` synthetic clouds cycling through every shape.
pub fn synthetic_corpus(
    clouds: usize,
    points: usize,
    seed: u64,
) -> Result<Vec<(Shape, PointCloud)>> {
    (0..clouds)
        .map(|i| {
            let shape = Shape::ALL[i % Shape::ALL.len()];
            let s = seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(i as u64);
            Ok((shape, synthetic_cloud(shape, points, s)?))
        })
        .collect()
}
