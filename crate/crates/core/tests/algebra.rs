use pbnpin::stp::{
    power_reducing_matrix, power_reducing_matrix_by_factors, swap_matrix, unit_kron_index, LogicalMatrix, Matrix,
};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-3i64..=3, rows * cols).prop_map(move |v| Matrix::from_i64(rows, cols, &v))
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..=4, 1usize..=4)
}

proptest! {
    #[test]
    fn stp_is_associative(
        (a, b, c) in (dims(), dims(), dims()).prop_flat_map(|((m, n), (p, q), (r, d))| {
            (matrix(m, n), matrix(p, q), matrix(r, d))
        })
    ) {
        prop_assert_eq!(a.stp(&b).stp(&c), a.stp(&b.stp(&c)));
    }

    #[test]
    fn column_pulls_through(
        (a, b) in (1usize..=4, dims()).prop_flat_map(|(p, (m, n))| (matrix(p, 1), matrix(m, n)))
    ) {
        let p = a.rows();
        prop_assert_eq!(a.stp(&b), Matrix::identity(p).kron(&b).stp(&a));
    }

    #[test]
    fn swap_exchanges_arbitrary_columns(
        (a, b) in (1usize..=5, 1usize..=5).prop_flat_map(|(p, d)| (matrix(p, 1), matrix(d, 1)))
    ) {
        let w = swap_matrix(a.rows(), b.rows()).to_matrix();
        prop_assert_eq!(b.stp(&a), w.stp(&a).stp(&b));
    }

    #[test]
    fn logical_roundtrip(indices in prop::collection::vec(1usize..=4, 1..12)) {
        let l = LogicalMatrix::new(4, indices).unwrap();
        prop_assert_eq!(LogicalMatrix::from_matrix(&l.to_matrix()), Some(l));
    }
}

#[test]
fn swap_on_unit_vectors_exhaustive() {
    for p in 1..=8 {
        for d in 1..=8 {
            let w = swap_matrix(p, d);
            for a in 1..=p {
                for b in 1..=d {
                    // b ⋉ a = W ⋉ a ⋉ b
                    assert_eq!(
                        unit_kron_index(b, p, a),
                        w.apply(unit_kron_index(a, d, b)),
                        "p={p} d={d} a={a} b={b}"
                    );
                }
            }
        }
    }
}

#[test]
fn swap_matches_matrix_product_small() {
    for p in 1..=3 {
        for d in 1..=3 {
            let w = swap_matrix(p, d).to_matrix();
            for a in 1..=p {
                for b in 1..=d {
                    let (va, vb) = (Matrix::unit_vector(p, a), Matrix::unit_vector(d, b));
                    assert_eq!(vb.stp(&va), w.stp(&va).stp(&vb));
                }
            }
        }
    }
}

#[test]
fn power_reducing_defining_property() {
    for n in 1..=6u32 {
        let size = 1usize << n;
        let phi = power_reducing_matrix(n);
        for j in 1..=size {
            assert_eq!(phi.apply(j), unit_kron_index(j, size, j), "n={n} j={j}");
        }
    }
    for n in 1..=3u32 {
        let size = 1usize << n;
        let phi = power_reducing_matrix(n).to_matrix();
        for j in 1..=size {
            let x = Matrix::unit_vector(size, j);
            assert_eq!(x.stp(&x), phi.stp(&x));
        }
    }
}

#[test]
fn power_reducing_factor_product() {
    for n in 1..=4 {
        assert_eq!(
            power_reducing_matrix_by_factors(n),
            power_reducing_matrix(n).to_matrix()
        );
    }
}
