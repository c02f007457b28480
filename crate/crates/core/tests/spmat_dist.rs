use contigforge::gridsim::Grid;
use contigforge::spmat::{
    kill_vector, spgemm, Counting, Direction, DistSparseMatrix, EdgeLabel, LocalSparse, Mirror,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_bool(rng: &mut ChaCha8Rng, n_rows: usize, n_cols: usize, density: f64) -> LocalSparse<()> {
    let mut t = Vec::new();
    for r in 0..n_rows {
        for c in 0..n_cols {
            if rng.gen_bool(density) {
                t.push((r, c, ()));
            }
        }
    }
    LocalSparse::from_triplets(n_rows, n_cols, t, |_, _| {}).unwrap()
}

fn dense(m: &LocalSparse<()>) -> Vec<Vec<u64>> {
    let mut d = vec![vec![0; m.n_cols()]; m.n_rows()];
    for (r, c, _) in m.iter() {
        d[r][c] = 1;
    }
    d
}

#[test]
fn counting_product_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = random_bool(&mut rng, 30, 20, 0.15);
    let da = dense(&a);
    let at = a.transpose();
    for p in [1, 4, 9, 16] {
        let mut grid = Grid::new(p).unwrap();
        let da_m = DistSparseMatrix::from_global(grid.topology(), &a);
        let dat = DistSparseMatrix::from_global(grid.topology(), &at);
        let c = spgemm(&mut grid, &da_m, &dat, &Counting::new()).unwrap();
        c.validate().unwrap();
        let c = c.gather();
        for u in 0..30 {
            for w in 0..30 {
                let expect: u64 = (0..20).map(|v| da[u][v] * da[w][v]).sum();
                assert_eq!(c.get(u, w).copied().unwrap_or(0), expect, "P={p} ({u},{w})");
            }
        }
        assert!(grid.ledger().is_conserved());
    }
}

#[test]
fn small_hand_product() {
    let a = LocalSparse::from_triplets(2, 2, vec![(0, 0, ()), (1, 0, ()), (1, 1, ())], |_, _| {}).unwrap();
    let mut grid = Grid::new(1).unwrap();
    let am = DistSparseMatrix::from_global(grid.topology(), &a);
    let at = DistSparseMatrix::from_global(grid.topology(), &a.transpose());
    let c = spgemm(&mut grid, &am, &at, &Counting::new()).unwrap().gather();
    assert_eq!(c.get(0, 1), Some(&1));
    assert_eq!(c.get(1, 0), Some(&1));
    let empty = DistSparseMatrix::<()>::empty(grid.topology(), 2, 2);
    assert_eq!(spgemm(&mut grid, &empty, &at, &Counting::new()).unwrap().nnz(), 0);
}

#[test]
fn dimension_mismatch_is_reported() {
    let mut grid = Grid::new(4).unwrap();
    let a = DistSparseMatrix::<()>::empty(grid.topology(), 3, 4);
    let b = DistSparseMatrix::<()>::empty(grid.topology(), 5, 2);
    assert!(spgemm(&mut grid, &a, &b, &Counting::new()).is_err());
}

fn symmetric_edges(n: usize, edges: &[(usize, usize)]) -> LocalSparse<()> {
    let mut t = Vec::new();
    for &(u, v) in edges {
        let (u, v) = (u % n, v % n);
        if u != v {
            t.push((u, v, ()));
            t.push((v, u, ()));
        }
    }
    LocalSparse::from_triplets(n, n, t, |_, _| {}).unwrap()
}

#[test]
fn path_degree_and_star_prune() {
    let path = symmetric_edges(3, &[(0, 1), (1, 2)]);
    let mut grid = Grid::new(4).unwrap();
    let m = DistSparseMatrix::from_global(grid.topology(), &path);
    assert_eq!(m.row_degree(&mut grid).unwrap().gather(), vec![1, 2, 1]);

    let star = symmetric_edges(6, &[(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)]);
    let m = DistSparseMatrix::from_global(grid.topology(), &star);
    let pruned = m.prune_rows_cols(&mut grid, &kill_vector(6, 2, [0])).unwrap();
    assert_eq!(pruned.nnz(), 0);
    assert_eq!(pruned.n_rows(), 6);
    let same = m.prune_rows_cols(&mut grid, &kill_vector(6, 2, [])).unwrap();
    assert_eq!(same.gather(), star);
}

#[test]
fn transpose_single_entry() {
    let m = LocalSparse::from_triplets(7, 7, vec![(2, 5, 9u32)], |_, _| {}).unwrap();
    let mut grid = Grid::new(9).unwrap();
    let d = DistSparseMatrix::from_global(grid.topology(), &m);
    let t = d.transpose(&mut grid).unwrap().gather();
    assert_eq!(t.iter().map(|(r, c, v)| (r, c, *v)).collect::<Vec<_>>(), vec![(5, 2, 9)]);
}

#[test]
fn symmetric_labels_transpose_to_themselves() {
    let label = EdgeLabel { direction: Direction::Forward, overhang: 3, src_overhang: 2, pre: 1, post: 0 };
    let m = LocalSparse::from_triplets(4, 4, vec![(0, 3, label), (3, 0, label.mirror())], |_, _| {}).unwrap();
    let mut grid = Grid::new(4).unwrap();
    let d = DistSparseMatrix::from_global(grid.topology(), &m);
    assert_eq!(d.transpose(&mut grid).unwrap().gather(), m);
}

#[test]
fn redistribute_matches_sequential_load() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let m = random_bool(&mut rng, 23, 23, 0.2).map(|_| 1u32);
    let mut grid = Grid::new(9).unwrap();
    grid.set_max_msg_bytes(13).unwrap();
    let mut per_rank = vec![Vec::new(); 9];
    for (r, c, v) in m.iter() {
        per_rank[rng.gen_range(0..9)].push((r, c, *v));
    }
    let d = DistSparseMatrix::redistribute(&mut grid, 23, 23, per_rank, |a, b| *a += b).unwrap();
    assert_eq!(d, DistSparseMatrix::from_global(grid.topology(), &m));
    assert!(grid.ledger().is_conserved());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operations_are_distribution_transparent(
        n in 1usize..40,
        edges in proptest::collection::vec((0usize..40, 0usize..40), 0..80),
        kill in proptest::collection::vec(0usize..40, 0..6),
        p_idx in 0usize..4,
    ) {
        let p = [1, 4, 9, 16][p_idx];
        let side = [1, 2, 3, 4][p_idx];
        let s = symmetric_edges(n, &edges).map(|_| 1u32);
        let mut grid = Grid::new(p).unwrap();
        let d = DistSparseMatrix::from_global(grid.topology(), &s);
        d.validate().unwrap();

        let mut degrees = vec![0u64; n];
        for (r, _, _) in s.iter() {
            degrees[r] += 1;
        }
        prop_assert_eq!(d.row_degree(&mut grid).unwrap().gather(), degrees);

        let kill: Vec<usize> = kill.into_iter().map(|k| k % n).collect();
        let pruned = d.prune_rows_cols(&mut grid, &kill_vector(n, side, kill.iter().copied())).unwrap();
        let oracle = s.clone().retain(|r, c, _| !kill.contains(&r) && !kill.contains(&c));
        prop_assert_eq!(pruned.gather(), oracle);

        let tt = d.transpose(&mut grid).unwrap().transpose(&mut grid).unwrap();
        prop_assert_eq!(tt, d);
        prop_assert!(grid.ledger().is_conserved());
    }
}
