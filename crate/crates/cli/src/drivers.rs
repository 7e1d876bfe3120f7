//! Threaded versions of the counting loops. Work is split by first edge (or
//! first saddle connection); per-item results are merged in item order, so
//! output does not depend on the thread count.

use vge_core::counting::{
    count_histogram, cumulate, validate_grid, CountCurve, GraphTransitions, Limits,
};
use vge_core::graph::MetricGraph;
use vge_core::origami::{SaddlePaths, Surface, VolumeCurve, VolumeMoments};
use vge_core::Error;

/// `f` over `0..n` on `threads` workers, results in index order.
pub fn par_map<T, F>(n: usize, threads: usize, f: F) -> Result<Vec<T>, Error>
where
    T: Send,
    F: Fn(usize) -> Result<T, Error> + Sync,
{
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        return (0..n).map(&f).collect();
    }
    let mut slots: Vec<Option<Result<T, Error>>> = (0..n).map(|_| None).collect();
    std::thread::scope(|scope| {
        let f = &f;
        let handles: Vec<_> = (0..threads)
            .map(|w| {
                scope.spawn(move || {
                    (w..n)
                        .step_by(threads)
                        .map(|i| (i, f(i)))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots
        .into_iter()
        .map(|s| s.expect("every index computed"))
        .collect()
}

fn check_total(visited: u64, limits: &Limits) -> Result<(), Error> {
    if visited > limits.visit_cap {
        return Err(Error::ResourceLimit {
            what: "visited paths",
            cap: limits.visit_cap,
        });
    }
    Ok(())
}

/// `N(x, R)` on a grid.
pub fn graph_counts(
    graph: &MetricGraph,
    x: usize,
    grid: &[f64],
    limits: &Limits,
    threads: usize,
) -> Result<CountCurve, Error> {
    validate_grid(grid)?;
    if x >= graph.vertex_count() {
        return Err(Error::InvalidArgument(format!("vertex {x} out of range")));
    }
    let sys = GraphTransitions::new(graph, grid[grid.len() - 1])?;
    let firsts = sys.starts(x).to_vec();
    let hists = par_map(firsts.len(), threads, |i| {
        count_histogram(&sys, firsts[i] as usize, grid, limits.visit_cap)
    })?;
    let mut total = vec![0u64; grid.len()];
    let mut visited = 0u64;
    for h in &hists {
        for (t, v) in total.iter_mut().zip(h) {
            *t += v;
            visited += v;
        }
    }
    check_total(visited, limits)?;
    cumulate(&mut total);
    Ok(CountCurve {
        radii: grid.to_vec(),
        counts: total,
        start_vertex: x,
    })
}

pub fn surface_volume(
    surface: &Surface,
    x: usize,
    grid: &[f64],
    limits: &Limits,
    threads: usize,
) -> Result<VolumeCurve, Error> {
    validate_grid(grid)?;
    if x >= surface.cones().len() {
        return Err(Error::NotSingular(x));
    }
    let paths = SaddlePaths::new(surface, grid[grid.len() - 1])?;
    let firsts = paths.starts(x).to_vec();
    let parts = par_map(firsts.len(), threads, |i| {
        paths.volume_moments(firsts[i] as usize, grid, limits.visit_cap)
    })?;
    let mut total = VolumeMoments::zeros(grid.len());
    for p in &parts {
        total.merge(p);
    }
    check_total(total.visited, limits)?;
    Ok(VolumeCurve::from_moments(
        x,
        surface.cones()[x].k,
        grid,
        &total,
    ))
}

pub fn surface_arcs(
    surface: &Surface,
    x: usize,
    y: usize,
    grid: &[f64],
    limits: &Limits,
    threads: usize,
) -> Result<CountCurve, Error> {
    validate_grid(grid)?;
    for c in [x, y] {
        if c >= surface.cones().len() {
            return Err(Error::NotSingular(c));
        }
    }
    let paths = SaddlePaths::new(surface, grid[grid.len() - 1])?;
    let firsts = paths.starts(x).to_vec();
    let parts = par_map(firsts.len(), threads, |i| {
        paths.arc_histogram(firsts[i] as usize, y, grid, limits.visit_cap)
    })?;
    let mut counts = vec![0u64; grid.len()];
    let mut visited = 0u64;
    for (h, v) in &parts {
        visited += v;
        for (c, x) in counts.iter_mut().zip(h) {
            *c += x;
        }
    }
    check_total(visited, limits)?;
    cumulate(&mut counts);
    Ok(CountCurve {
        radii: grid.to_vec(),
        counts,
        start_vertex: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use vge_core::counting::count_paths;
    use vge_core::origami::{count_arcs, volume, Origami};

    #[test]
    fn threads_do_not_change_results() {
        let g = MetricGraph::bouquet(&[1.0, std::f64::consts::SQRT_2]).unwrap();
        let grid: Vec<f64> = (1..=40).map(|i| i as f64 * 0.25).collect();
        let lim = Limits::default();
        let serial = count_paths(&g, 0, &grid, &lim).unwrap();
        for t in [1, 2, 4] {
            assert_eq!(graph_counts(&g, 0, &grid, &lim, t).unwrap(), serial);
        }
        let s = Surface::new(Origami::l_shape(), false).unwrap();
        let grid: Vec<f64> = (1..=16).map(|i| i as f64 * 0.25).collect();
        let v = volume(&s, 0, &grid, &lim).unwrap();
        let a = count_arcs(&s, 0, 0, &grid, &lim).unwrap();
        for t in [1, 3, 4] {
            assert_eq!(surface_volume(&s, 0, &grid, &lim, t).unwrap(), v);
            assert_eq!(surface_arcs(&s, 0, 0, &grid, &lim, t).unwrap(), a);
        }
    }
}
