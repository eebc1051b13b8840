use std::io::Cursor;

use holosim::cloud::{
    dist2, estimate_normals, normalize_unit_cube, voxel_centers, voxelize, Point3,
};
use holosim::codec::{
    fec_decode_hard, fec_encode, jscc_encode, octree_build, octree_decode, octree_encode, CodeRate,
    JsccWeights,
};
use holosim::harness::{
    joint_symbol_count, octree_payloads, synthetic_cloud, transmit_joint, transmit_separated,
    JointConfig, JointModels, Shape,
};
use holosim::io::{read_ply_from, write_ply_to, BitWriter, PlyFormat};
use holosim::metrics::{chamfer, d1, d2, psnr_db, Symmetry};
use holosim::phy::{
    build_qam, demodulate_hard, demodulate_soft, feature_to_probabilities, probabilistic_modulate,
    ChannelKind, McsTable,
};
use holosim::sampling::layers::{build_patches, local_attention, FeatureMatrix};
use holosim::sampling::{
    embed_points, sample_fps, sample_poisson, sample_poisson_count, sample_random, sample_semantic,
    SamplerWeights,
};
use holosim::PointCloud;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_points(n: usize, seed: u64) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| [rng.random(), rng.random(), rng.random()])
        .collect()
}

fn random_cloud(n: usize, seed: u64) -> PointCloud {
    PointCloud::new(random_points(n, seed)).unwrap()
}

fn light() -> ProptestConfig {
    ProptestConfig::with_cases(24)
}

proptest! {
    #[test]
    fn normals_have_unit_length(seed in 0u64..1000, n in 3usize..120) {
        let normals = estimate_normals(&random_cloud(n, seed), 8.min(n)).unwrap();
        for v in &normals.vectors {
            prop_assert!(((v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn voxelizing_centers_is_idempotent(seed in 0u64..1000, n in 1usize..300, depth in 1u8..=12) {
        let v = voxelize(&random_cloud(n, seed), depth).unwrap().voxels;
        let centers = PointCloud::new(voxel_centers(&v, depth)).unwrap();
        prop_assert_eq!(voxelize(&centers, depth).unwrap().voxels, v);
    }

    #[test]
    fn normalization_inverts(seed in 0u64..1000, n in 2usize..100, scale in 0.01f64..1000.0, shift in -50.0f64..50.0) {
        let pts: Vec<Point3> = random_points(n, seed).iter().map(|p| p.map(|v| v * scale + shift)).collect();
        let cloud = PointCloud::new(pts).unwrap();
        let (unit, bb) = normalize_unit_cube(&cloud).unwrap();
        let back = bb.denormalize(&unit);
        for (a, b) in back.positions().iter().zip(cloud.positions()) {
            for i in 0..3 {
                prop_assert!((a[i] - b[i]).abs() <= 1e-9 * (1.0 + b[i].abs()));
            }
        }
    }

    #[test]
    fn ply_round_trip_is_lossless(seed in 0u64..1000, n in 1usize..200, binary in any::<bool>()) {
        // f32-representable coordinates survive both encodings exactly
        let pts: Vec<Point3> = random_points(n, seed)
            .iter()
            .map(|p| p.map(|v| (v * 200.0 - 100.0) as f32 as f64))
            .collect();
        let cloud = PointCloud::new(pts).unwrap();
        let format = if binary { PlyFormat::BinaryLittleEndian } else { PlyFormat::Ascii };
        let mut buf = Vec::new();
        write_ply_to(&cloud, &mut buf, format).unwrap();
        prop_assert_eq!(read_ply_from(Cursor::new(buf)).unwrap(), cloud);
    }

    #[test]
    fn bit_fields_round_trip(fields in proptest::collection::vec((1u32..=64, any::<u64>()), 1..50)) {
        let mut w = BitWriter::new();
        let masked: Vec<(u32, u64)> = fields
            .iter()
            .map(|&(width, v)| (width, if width == 64 { v } else { v & ((1 << width) - 1) }))
            .collect();
        for &(width, v) in &masked {
            w.write_bits(v, width).unwrap();
        }
        let stream = w.finish();
        prop_assert_eq!(stream.bit_len(), masked.iter().map(|f| f.0 as u64).sum::<u64>());
        let mut r = stream.reader();
        for &(width, v) in &masked {
            prop_assert_eq!(r.read_bits(width).unwrap(), v);
        }
    }

    #[test]
    fn octree_round_trips_random_voxel_sets(seed in 0u64..10_000, depth in 1u8..=10, n in 1usize..400) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let side = 1u32 << depth;
        let mut v: Vec<[u32; 3]> = (0..n).map(|_| std::array::from_fn(|_| rng.random_range(0..side))).collect();
        v.sort_unstable();
        v.dedup();
        prop_assert_eq!(octree_decode(&octree_encode(&v, depth).unwrap()).unwrap(), v);
    }

    #[test]
    fn single_voxel_costs_one_byte_per_level(depth in 1u8..=16, x in any::<u32>(), y in any::<u32>(), z in any::<u32>()) {
        let mask = ((1u64 << depth) - 1) as u32;
        let code = octree_build(&[[x & mask, y & mask, z & mask]], depth).unwrap();
        prop_assert_eq!(code.occupancy.len(), depth as usize);
    }

    #[test]
    fn viterbi_fixes_double_errors(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let info: Vec<bool> = (0..100).map(|_| rng.random()).collect();
        let mut coded = fec_encode(&info, CodeRate::Half).unwrap();
        let len = coded.bits.len();
        // two errors far enough apart for the free distance of 10
        let a = rng.random_range(0..len / 2 - 20);
        let b = rng.random_range(a + 20..len);
        coded.bits[a] ^= true;
        coded.bits[b] ^= true;
        prop_assert_eq!(fec_decode_hard(&coded).unwrap(), info);
    }

    #[test]
    fn constellation_rows_draw_members(seed in 0u64..1000, order_idx in 0usize..4, t in 0.01f64..5.0) {
        let c = build_qam([4, 16, 64, 256][order_idx]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let feats: Vec<f64> = (0..31).map(|_| rng.random_range(-2.0..2.0)).collect();
        let rows = feature_to_probabilities(&feats, &c, t).unwrap();
        let s = probabilistic_modulate(&rows, &c, seed).unwrap();
        for y in &s.symbols {
            prop_assert!(c.points().contains(y));
        }
    }

    #[test]
    fn llr_signs_match_hard_decisions(seed in 0u64..1000, order_idx in 0usize..4) {
        let c = build_qam([4, 16, 64, 256][order_idx]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rx: Vec<Complex64> = (0..50)
            .map(|_| Complex64::new(rng.random_range(-1.6..1.6), rng.random_range(-1.6..1.6)))
            .collect();
        let llr = demodulate_soft(&rx, &c, 0.3);
        let hard = demodulate_hard(&rx, &c);
        for (l, h) in llr.iter().zip(&hard) {
            if l.abs() > 1e-9 {
                prop_assert_eq!(*l < 0.0, *h);
            }
        }
    }

    #[test]
    fn chamfer_is_symmetric(seed in 0u64..1000, n in 1usize..60, m in 1usize..60) {
        let a = random_cloud(n, seed);
        let b = random_cloud(m, seed + 1);
        prop_assert_eq!(chamfer(&a, &b).unwrap(), chamfer(&b, &a).unwrap());
    }

    #[test]
    fn psnr_decreases_with_mse(a in 1e-9f64..10.0, b in 1e-9f64..10.0, peak in 0.1f64..100.0) {
        prop_assume!(a < b);
        let (pa, pb) = (psnr_db(a, peak), psnr_db(b, peak));
        prop_assume!(pa < 999.0);
        prop_assert!(pa > pb);
    }

    #[test]
    fn zero_error_iff_coincident(seed in 0u64..1000, n in 3usize..50, shift in prop_oneof![Just(0.0), 1e-3f64..0.1]) {
        let a = random_cloud(n, seed);
        let b = PointCloud::new(a.positions().iter().rev().map(|p| [p[0] + shift, p[1], p[2]]).collect()).unwrap();
        let (mse1, _) = d1(&a, &b, 1.0, Symmetry::Max).unwrap();
        let normals = estimate_normals(&a, 8.min(n)).unwrap();
        let (mse2, _) = d2(&a, Some(&normals.vectors), &b, 1.0, Symmetry::Max).unwrap();
        prop_assert_eq!(mse1 == 0.0, shift == 0.0);
        prop_assert!(mse2 <= mse1);
    }
}

proptest! {
    #![proptest_config(light())]

    #[test]
    fn attention_rows_are_distributions(seed in 0u64..1000, n in 2usize..150, k in 1usize..10) {
        let cloud = random_cloud(n, seed);
        let w = SamplerWeights::default();
        let f = embed_points(&cloud, &w).unwrap();
        let patches = build_patches(cloud.positions(), k.min(n)).unwrap();
        let (_, weights) = local_attention(&f, &patches, &w.attention).unwrap();
        for row in &weights {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn semantic_selection_ignores_point_order(seed in 0u64..1000, n in 40usize..200, ratio in 0.05f64..0.9) {
        let pts = random_points(n, seed);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        let w = SamplerWeights::default();
        let a = sample_semantic(&PointCloud::new(pts.clone()).unwrap(), ratio, &w, 4, 4).unwrap();
        let shuffled = PointCloud::new(perm.iter().map(|&i| pts[i]).collect()).unwrap();
        let b = sample_semantic(&shuffled, ratio, &w, 4, 4).unwrap();
        let mut sa: Vec<usize> = a.indices.clone();
        let mut sb: Vec<usize> = b.indices.iter().map(|&j| perm[j]).collect();
        sa.sort_unstable();
        sb.sort_unstable();
        prop_assert_eq!(sa, sb);
    }

    #[test]
    fn semantic_full_ratio_is_identity(seed in 0u64..1000, n in 1usize..200) {
        let cloud = random_cloud(n, seed);
        let s = sample_semantic(&cloud, 1.0, &SamplerWeights::default(), 4, 4).unwrap();
        prop_assert_eq!(s.indices, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(s.cloud, cloud);
    }

    #[test]
    fn poisson_is_separated_and_maximal(seed in 0u64..1000, n in 1usize..300, r in 0.02f64..0.5) {
        let cloud = random_cloud(n, seed);
        let idx = sample_poisson(&cloud, r, seed).unwrap();
        let pts = cloud.positions();
        for (i, &a) in idx.iter().enumerate() {
            for &b in &idx[i + 1..] {
                prop_assert!(dist2(&pts[a], &pts[b]).sqrt() >= r);
            }
        }
        for p in pts {
            prop_assert!(idx.iter().any(|&a| dist2(p, &pts[a]).sqrt() < r) || idx.iter().any(|&a| pts[a] == *p));
        }
    }

    #[test]
    fn samplers_are_deterministic(seed in 0u64..1000, n in 10usize..200, mfrac in 0.05f64..1.0) {
        let cloud = random_cloud(n, seed);
        let m = ((n as f64 * mfrac) as usize).max(1);
        prop_assert_eq!(sample_fps(&cloud, m, 0).unwrap(), sample_fps(&cloud, m, 0).unwrap());
        prop_assert_eq!(sample_random(&cloud, m, seed).unwrap(), sample_random(&cloud, m, seed).unwrap());
        prop_assert_eq!(sample_poisson_count(&cloud, m, seed).unwrap(), sample_poisson_count(&cloud, m, seed).unwrap());
        let w = SamplerWeights::default();
        let r = m as f64 / n as f64;
        prop_assert_eq!(sample_semantic(&cloud, r, &w, 4, 4).unwrap(), sample_semantic(&cloud, r, &w, 4, 4).unwrap());
    }

    #[test]
    fn jscc_encode_is_deterministic(seed in 0u64..1000, n in 8usize..200, start in 0usize..8) {
        let cloud = random_cloud(n, seed);
        let w = JsccWeights::default();
        let m = (n / 4).max(1);
        prop_assert_eq!(jscc_encode(&cloud, &w, m, 8, start).unwrap(), jscc_encode(&cloud, &w, m, 8, start).unwrap());
    }

    #[test]
    fn joint_never_sends_more_than_it_has(seed in 0u64..1000, snr in -10.0f64..40.0, budget in 1usize..5000, shape in 0usize..5) {
        let cloud = synthetic_cloud(Shape::ALL[shape], 400, seed).unwrap();
        let models = JointModels::default();
        let cfg = JointConfig { centroids: 48, ..JointConfig::default() };
        let out = transmit_joint(&cloud, &models, &cfg, budget, ChannelKind::Rayleigh, snr, seed).unwrap();
        prop_assert!(out.symbols <= joint_symbol_count(&cfg, 48, &models.codec));
        prop_assert!(out.symbols <= budget);
    }

    #[test]
    fn separated_failures_are_reported(seed in 0u64..1000, snr in -10.0f64..20.0, budget in 1usize..3000) {
        let cloud = synthetic_cloud(Shape::Cube, 300, seed).unwrap();
        let payloads = octree_payloads(&cloud, 8).unwrap();
        let out = transmit_separated(&cloud, &payloads, &McsTable::rayleigh(), budget, ChannelKind::Rayleigh, snr, seed).unwrap();
        prop_assert!(out.symbols <= budget);
        if out.failed {
            prop_assert_eq!(out.report.d1_psnr_db, 0.0);
        } else {
            prop_assert!(out.report.d1_psnr_db > 0.0);
        }
    }
}

#[test]
fn constellations_have_unit_energy() {
    for order in [4, 16, 64, 256] {
        let c = build_qam(order).unwrap();
        let e = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
        assert!((e - 1.0).abs() < 1e-12);
    }
}

#[test]
fn feature_matrix_shapes_are_checked() {
    assert!(FeatureMatrix::from_flat(2, 3, vec![0.0; 5]).is_err());
}
