use std::sync::Arc;

use camnet::baselines::{line_of_sight, PointTracker, StatController, StaticSensorConfig, StaticSensorModel, SysController};
use camnet::controller::Controller;
use camnet::gridworld::{CameraModel, CameraNetwork, GridMap, JointAction, JointCameraState};
use camnet::motion::MotionParams;
use camnet::World;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn corridor(width: usize) -> Arc<World> {
    let map = GridMap::open(width, 3).unwrap();
    let n = map.num_locations();
    let cams = CameraNetwork::new(vec![CameraModel::new(0, vec![(0..n).collect()]).unwrap()], n).unwrap();
    Arc::new(World::new(map, cams, MotionParams::default()).unwrap())
}

#[test]
fn estimate_keeps_straight_line_through_occlusion() {
    let world = corridor(12);
    let map = &world.map;
    let mut tracker = PointTracker::new(world.clone(), 1, None);
    for x in 0..3 {
        tracker.ingest(&[Some(map.loc_at(x, 1).unwrap())]);
    }
    // the target turns south into the unobserved region; the estimate does not
    for _ in 0..3 {
        tracker.ingest(&[None]);
    }
    let est = tracker.estimates()[0].unwrap();
    assert_eq!(map.loc_xy(est.state.loc), (5, 1));
    assert_eq!(est.state.dir, 0);
    assert_eq!(est.staleness, 3);
    assert_ne!(map.loc_xy(est.state.loc), (3, 2));
}

#[test]
fn staleness_cap_drops_estimates() {
    let world = corridor(12);
    let mut tracker = PointTracker::new(world.clone(), 1, Some(2));
    tracker.ingest(&[Some(0)]);
    tracker.ingest(&[None]);
    tracker.ingest(&[None]);
    assert!(tracker.estimates()[0].is_some());
    tracker.ingest(&[None]);
    assert!(tracker.estimates()[0].is_none());
    assert!(tracker.predicted_locations().is_empty());
}

#[test]
fn noiseless_static_sensor_reports_truth() {
    let map = GridMap::from_ascii(".....\n..#..\n.....\n").unwrap();
    let config = StaticSensorConfig {
        sigma0: 0.0,
        growth: 0.5,
        positions: vec![[0, 1]],
    };
    let sensor = StaticSensorModel::new(&map, &config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for loc in 0..map.num_locations() {
        let (x, y) = map.loc_xy(loc);
        let report = sensor.report(&map, loc, &mut rng);
        if line_of_sight(&map, (0, 1), (x, y)) {
            assert_eq!(report, Some(loc));
        } else {
            assert_eq!(report, None, "({x}, {y}) is behind the pillar");
        }
    }
    // straight behind the pillar
    assert!(!sensor.covers(map.loc_at(4, 1).unwrap()));
}

#[test]
fn static_sensor_noise_grows_with_distance() {
    let map = GridMap::open(30, 1).unwrap();
    let config = StaticSensorConfig {
        sigma0: 1.0,
        growth: 0.5,
        positions: vec![[0, 0]],
    };
    let sensor = StaticSensorModel::new(&map, &config).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let variance = |x: usize, rng: &mut ChaCha8Rng| {
        let loc = map.loc_at(x as i64, 0).unwrap();
        let xs: Vec<f64> = (0..10_000)
            .map(|_| map.loc_xy(sensor.report(&map, loc, rng).unwrap()).0 as f64)
            .collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / xs.len() as f64
    };
    let near = variance(2, &mut rng);
    let far = variance(10, &mut rng);
    assert!(far > near, "variance at 10 ({far}) should exceed variance at 2 ({near})");
}

#[test]
fn stat_maximizes_union_not_sum() {
    // camera 0: A = {0,1,2} or B = {5}; camera 1: C = {0,1,2} or D = {3,4}
    let cams = vec![
        CameraModel::new(0, vec![vec![0, 1, 2], vec![5]]).unwrap(),
        CameraModel::new(1, vec![vec![0, 1, 2], vec![3, 4]]).unwrap(),
    ];
    let net = CameraNetwork::new(cams, 8).unwrap();
    let by_sum = net
        .joint_states()
        .into_iter()
        .max_by_key(|s| {
            net.cameras()
                .iter()
                .zip(&s.0)
                .map(|(c, &i)| c.fov(i).unwrap().len())
                .sum::<usize>()
        })
        .unwrap();
    assert_eq!(by_sum.0, vec![0, 0]);
    let stat = StatController::new(&net).unwrap();
    assert_eq!(stat.state().0, vec![0, 1]);
    assert_eq!(net.joint_fov(stat.state()).unwrap().len(), 5);
}

#[test]
fn stat_breaks_ties_lexicographically() {
    let cams = vec![CameraModel::new(0, vec![vec![0, 1], vec![2, 3], vec![4]]).unwrap()];
    let net = CameraNetwork::new(cams, 5).unwrap();
    assert_eq!(StatController::new(&net).unwrap().state().0, vec![0]);
}

#[test]
fn sys_cycles_through_states() {
    let cams = vec![
        CameraModel::new(0, vec![vec![0], vec![1], vec![2]]).unwrap(),
        CameraModel::new(1, vec![vec![3], vec![4]]).unwrap(),
    ];
    let net = CameraNetwork::new(cams, 5).unwrap();
    let sys = SysController::new(&net, &[0, 1]).unwrap();
    let seq: Vec<Vec<usize>> = (0..6).map(|k| sys.action_at(k).0).collect();
    assert_eq!(
        seq,
        vec![vec![0, 1], vec![1, 0], vec![2, 1], vec![0, 0], vec![1, 1], vec![2, 0]]
    );
    assert_eq!(sys.initial_cameras(), JointCameraState(vec![2, 0]));
    assert_eq!(sys.action_at(6), JointAction(vec![0, 1]));
    assert!(SysController::new(&net, &[1]).is_err());
}
