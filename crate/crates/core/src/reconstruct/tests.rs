use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::graph::{build_knn_graph, Metric};
use crate::mesh_out::{compute_metrics, extract_triangles};
use crate::pointcloud::PointCloud;
use crate::synth;

fn planar(points: &[(f64, f64)]) -> PointCloud {
    let positions = points.iter().map(|&(x, y)| Point3::new(x, y, 0.0)).collect();
    let normals = vec![crate::geom::Vec3::z(); points.len()];
    PointCloud::with_normals(positions, normals).unwrap()
}

fn complete_graph(cloud: &PointCloud) -> Graph {
    let n = cloud.len();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push(Edge { u, v, len: (cloud.positions[u] - cloud.positions[v]).norm() });
        }
    }
    Graph::from_edges(n, edges)
}

fn mesher<'a>(g: &'a Graph, cloud: &'a PointCloud, params: &Params) -> Mesher<'a> {
    Mesher::new(g, &cloud.positions, cloud.normals.as_deref().unwrap(), params, Options::default()).unwrap()
}

fn run_all(m: &mut Mesher) {
    for c in 0..m.graph.component_count() {
        if m.graph.component_members(c).len() >= 2 {
            m.run_component(c).unwrap();
        }
    }
}

fn insert(m: &mut Mesher, u: usize, v: usize) {
    let ins = m.rs.insert_edge(u, v).unwrap();
    m.ft.split_on_insert(&ins).unwrap();
    m.record_face_split(u).unwrap();
}

#[test]
fn square_topology_and_geometry() {
    let cloud = planar(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.1), (0.0, 1.0)]);
    let g = complete_graph(&cloud);
    let mut m = mesher(&g, &cloud, &Params::default());
    // a spanning tree is a single face: any edge passes the topology test
    assert!(m.topology_test(0, 2).unwrap());
    assert!(m.topology_test(1, 3).unwrap());
    assert!(m.geometry_test(1, 3));
    for (u, v) in [(0, 1), (1, 2), (2, 3), (0, 3)] {
        if !m.rs.has_edge(u, v) {
            insert(&mut m, u, v);
        }
    }
    insert(&mut m, 0, 2);
    // 1 and 3 now sit on two different triangles
    assert!(!m.topology_test(1, 3).unwrap());
    assert!(!m.geometry_test(1, 3));
    assert_eq!(m.comp[0].faces, 3);
}

#[test]
fn quality_rejects_flat_triangles() {
    let flat = planar(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.02)]);
    let g = complete_graph(&flat);
    let m = mesher(&g, &flat, &Params::default());
    assert!(m.rs.has_edge(0, 1) && m.rs.has_edge(1, 2));
    assert!(!m.quality_test(0, 2).unwrap());

    let h = 3f64.sqrt() / 2.0;
    let eq = planar(&[(0.0, 0.0), (1.0, 0.0), (0.5, h)]);
    let g = complete_graph(&eq);
    let m = mesher(&g, &eq, &Params::default());
    let missing = [(0, 1), (1, 2), (0, 2)].into_iter().find(|&(u, v)| !m.rs.has_edge(u, v)).unwrap();
    assert!(m.quality_test(missing.0, missing.1).unwrap());
}

#[test]
fn wide_quality_bounds_admit_flat_triangles() {
    let flat = planar(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.02)]);
    let g = complete_graph(&flat);
    let params = Params { quality_min_deg: 0.0, quality_max_deg: 180.0, ..Params::default() };
    let m = mesher(&g, &flat, &params);
    assert!(m.quality_test(0, 2).unwrap());
}

fn grid(m: usize) -> PointCloud {
    let pts: Vec<(f64, f64)> = (0..m * m).map(|i| ((i % m) as f64, (i / m) as f64 * 1.01)).collect();
    planar(&pts)
}

#[test]
fn planar_grid_is_fully_triangulated() {
    let cloud = grid(10);
    let params = Params { k: 8, ..Params::default() };
    let g = build_knn_graph(&cloud, &params, Metric::Euclidean).unwrap();
    let rec = reconstruct(&g, &cloud.positions, cloud.normals.as_deref().unwrap(), &params, Options::default()).unwrap();
    let mesh = extract_triangles(&rec.rs, &cloud.positions, None);
    assert_eq!(mesh.triangles.len(), 2 * 81);
    assert_eq!(mesh.holes.len(), 1);
    assert!(mesh.is_consistently_oriented());
    let metrics = compute_metrics(&mesh, cloud.len(), None);
    assert_eq!(metrics.boundary_edges, 36);
    assert_eq!(metrics.components[0].genus, 0);
    assert!(rec.stats.handles.is_empty());
    for t in &mesh.triangles {
        let [a, b, c] = t.map(|i| mesh.vertices[i]);
        assert!((b - a).cross(&(c - a)).z > 0.0, "triangle {t:?} is clockwise");
    }
}

fn sphere_mesher_run(n: usize, seed: u64) -> (PointCloud, Graph) {
    let cloud = synth::sample_sphere(n, seed);
    let g = build_knn_graph(&cloud, &Params::default(), Metric::Euclidean).unwrap();
    (cloud, g)
}

#[test]
fn sphere_is_closed_and_mesh_edges_are_graph_edges() {
    let (cloud, g) = sphere_mesher_run(2000, 1);
    let mut m = mesher(&g, &cloud, &Params::default());
    run_all(&mut m);
    for h in m.rs.active_halfedges() {
        assert!(g.has_edge(m.rs.tail(h), m.rs.head(h)));
    }
    assert!(m.stats.euler_checks > 2000);
    let mesh = extract_triangles(&m.rs, &cloud.positions, None);
    let metrics = compute_metrics(&mesh, cloud.len(), None);
    assert_eq!(metrics.boundary_edges, 0);
    assert_eq!(metrics.referenced_vertices, 2000);
    assert_eq!(metrics.components.len(), 1);
    assert_eq!(metrics.components[0].genus, 0);
    assert!(mesh.is_consistently_oriented());
    assert!(m.stats.handles.is_empty());
}

/// Unbounded BFS over mesh edges.
fn bfs_distances(rs: &RotationSystem, src: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; rs.vertex_count()];
    dist[src] = Some(0);
    let mut queue = VecDeque::from([src]);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap();
        for y in rs.mesh_neighbors(x) {
            if dist[y].is_none() {
                dist[y] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

#[test]
fn hop_distance_matches_bfs() {
    let (cloud, g) = sphere_mesher_run(600, 3);
    let mut m = mesher(&g, &cloud, &Params { max_genus: Some(0), ..Params::default() });
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // checked both on the spanning tree and on the finished mesh
    for round in 0..2 {
        if round == 1 {
            run_all(&mut m);
        }
        for _ in 0..40 {
            let u = rng.random_range(0..600);
            let dist = bfs_distances(&m.rs, u);
            for _ in 0..10 {
                let v = rng.random_range(0..600);
                let cap = rng.random_range(0..30);
                let expect = dist[v].filter(|&d| d <= cap);
                assert_eq!(m.hop_distance_capped(u, v, cap), expect, "u={u} v={v} cap={cap}");
            }
        }
    }
}

#[test]
fn hop_distance_on_a_path() {
    let pts: Vec<(f64, f64)> = (0..6).map(|i| (i as f64, 0.0)).collect();
    let cloud = planar(&pts);
    let edges = (0..5).map(|i| Edge { u: i, v: i + 1, len: 1.0 });
    let g = Graph::from_edges(6, edges);
    let mut m = mesher(&g, &cloud, &Params::default());
    assert_eq!(m.hop_distance_capped(0, 5, 3), None);
    assert_eq!(m.hop_distance_capped(0, 5, 5), Some(5));
    assert_eq!(m.hop_distance_capped(2, 2, 0), Some(0));
}

fn torus_run(max_genus: Option<usize>) -> (crate::mesh_out::Metrics, Reconstruction) {
    let cloud = synth::sample_torus(4000, 2.0, 0.7, 5);
    let params = Params { max_genus, ..Params::default() };
    let g = build_knn_graph(&cloud, &params, Metric::Euclidean).unwrap();
    let rec = reconstruct(&g, &cloud.positions, cloud.normals.as_deref().unwrap(), &params, Options::default()).unwrap();
    let mesh = extract_triangles(&rec.rs, &cloud.positions, None);
    (compute_metrics(&mesh, cloud.len(), None), rec)
}

#[test]
fn torus_gets_one_handle() {
    let (metrics, rec) = torus_run(None);
    assert_eq!(rec.stats.handles.len(), 1, "{:?}", rec.stats);
    assert_eq!(metrics.components.len(), 1);
    assert_eq!(metrics.components[0].genus, 1);
}

#[test]
fn torus_without_handles_stays_genus_zero() {
    let (metrics, rec) = torus_run(Some(0));
    assert!(rec.stats.handles.is_empty());
    assert!(metrics.components.iter().all(|c| c.genus == 0));
    assert!(metrics.boundary_edges > 0);
}

#[test]
fn deterministic_across_runs() {
    let (cloud, g) = sphere_mesher_run(800, 9);
    let run = |seed: u64| {
        let rec = reconstruct(&g, &cloud.positions, cloud.normals.as_deref().unwrap(), &Params::default(), Options { seed, ..Options::default() }).unwrap();
        extract_triangles(&rec.rs, &cloud.positions, None).triangles
    };
    let first = run(1);
    assert_eq!(first, run(1));
    // treap priorities do not influence the result
    assert_eq!(first, run(2));
}

#[test]
fn invalid_params_rejected() {
    let cloud = grid(3);
    let g = complete_graph(&cloud);
    let params = Params { k: 1, ..Params::default() };
    assert!(Mesher::new(&g, &cloud.positions, cloud.normals.as_deref().unwrap(), &params, Options::default()).is_err());
}

/// Mesher over the complete graph of a convex polygon with its boundary
/// cycle already inserted.
fn polygon_cycle<'a>(cloud: &'a PointCloud, g: &'a Graph) -> Mesher<'a> {
    let mut m = mesher(g, cloud, &Params::default());
    let n = cloud.len();
    for i in 0..n {
        let (u, v) = (i, (i + 1) % n);
        if !m.rs.has_edge(u, v) {
            insert(&mut m, u, v);
        }
    }
    m
}

fn face_sizes(rs: &RotationSystem) -> Vec<usize> {
    let mut sizes: Vec<usize> = rs.faces().iter().map(|f| f.len()).collect();
    sizes.sort_unstable();
    sizes
}

#[test]
fn square_face_gets_one_diagonal() {
    let cloud = planar(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.1), (0.0, 1.0)]);
    let g = complete_graph(&cloud);
    let mut m = polygon_cycle(&cloud, &g);
    assert_eq!(face_sizes(&m.rs), vec![4, 4]);
    m.triangulate(0, &[]).unwrap();
    assert_eq!(m.stats.triangulation_inserted, 1);
    // the outer face cannot take the crossing diagonal
    assert_eq!(face_sizes(&m.rs), vec![3, 3, 4]);
}

#[test]
fn pentagon_face_gets_two_ears() {
    let pts: Vec<(f64, f64)> = (0..5)
        .map(|i| {
            let a = 2.0 * std::f64::consts::PI * i as f64 / 5.0;
            (a.cos(), a.sin())
        })
        .collect();
    let cloud = planar(&pts);
    let g = complete_graph(&cloud);
    let mut m = polygon_cycle(&cloud, &g);
    m.triangulate(0, &[]).unwrap();
    assert_eq!(m.stats.triangulation_inserted, 2);
    assert_eq!(face_sizes(&m.rs), vec![3, 3, 3, 5]);
}

#[test]
fn sphere_has_no_handle_candidates() {
    let (cloud, g) = sphere_mesher_run(1500, 4);
    let mut m = mesher(&g, &cloud, &Params::default());
    let queue = g.sorted_edges(0);
    let limit = (2 * queue.len()).div_ceil(3);
    m.insertion_stage(&queue[..limit]).unwrap();
    assert!(m.find_handle_candidates(0).unwrap().is_empty());
}

#[test]
fn ten_hop_pair_stays_below_default_threshold() {
    let pts: Vec<(f64, f64)> = (0..11).map(|i| (i as f64, 0.0)).collect();
    let cloud = planar(&pts);
    let g = Graph::from_edges(11, (0..10).map(|i| Edge { u: i, v: i + 1, len: 1.0 }));
    let mut m = mesher(&g, &cloud, &Params::default());
    // a handle needs the hop distance to exceed n = 50
    assert_eq!(m.hop_distance_capped(0, 10, Params::default().n), Some(10));
}

/// Two planar strips meeting at a ridge; their normals differ by 50°, just
/// inside the default normal filter.
fn crease(m: usize) -> PointCloud {
    let (s, c) = 25f64.to_radians().sin_cos();
    let mut positions = Vec::new();
    let mut normals = Vec::new();
    for side in [-1.0, 1.0] {
        for i in 0..m {
            for j in 0..m {
                // side -1 carries the ridge row (j == 0); side +1 starts one step out
                let d = (j as f64 + if side > 0.0 { 1.0 } else { 0.0 }) * 0.1;
                let x = i as f64 * 0.1 + 0.013 * ((i * 7 + j * 3) % 5) as f64;
                positions.push(Point3::new(x, side * d * c, -d * s));
                let n = if d == 0.0 {
                    crate::geom::Vec3::z()
                } else {
                    crate::geom::Vec3::new(0.0, side * s, c)
                };
                normals.push(n);
            }
        }
    }
    PointCloud::with_normals(positions, normals).unwrap()
}

#[test]
fn sharp_crease_has_no_interior_holes() {
    let cloud = crease(14);
    let params = Params { k: 12, ..Params::default() };
    let g = build_knn_graph(&cloud, &params, Metric::Euclidean).unwrap();
    let rec = reconstruct(&g, &cloud.positions, cloud.normals.as_deref().unwrap(), &params, Options::default()).unwrap();
    let mesh = extract_triangles(&rec.rs, &cloud.positions, None);
    let metrics = compute_metrics(&mesh, cloud.len(), None);
    assert_eq!(metrics.components.len(), 1, "{:?} graph comps {}", metrics.components, g.component_count());
    assert_eq!(metrics.components[0].genus, 0);
    assert_eq!(metrics.components[0].boundary_loops, 1, "{:?}", mesh.holes.iter().map(Vec::len).collect::<Vec<_>>());
    assert!(mesh.is_consistently_oriented());
}
