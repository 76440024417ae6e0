use proptest::prelude::*;

use wdom::subset_conv::{
    max_sum_convolve, min_sum_convolve, naive_convolve, ConvolutionError, Mode, SetFunctionTable,
};

const INF: i32 = i32::MAX;
const NEG: i32 = i32::MIN;

fn table(values: &[i32]) -> SetFunctionTable<i32> {
    SetFunctionTable::new(values.len().trailing_zeros() as usize, values.to_vec()).unwrap()
}

fn arb_table(m: usize, bound: i32, sentinel: i32) -> impl Strategy<Value = SetFunctionTable<i32>> {
    prop::collection::vec(prop_oneof![1 => Just(sentinel), 5 => 0..=bound], 1 << m)
        .prop_map(move |v| SetFunctionTable::new(m, v).unwrap())
}

fn arb_triple(
    sentinel: i32,
) -> impl Strategy<
    Value = (
        SetFunctionTable<i32>,
        SetFunctionTable<i32>,
        SetFunctionTable<i32>,
        i32,
    ),
> {
    (0usize..8, 1i32..=32).prop_flat_map(move |(m, bound)| {
        (
            arb_table(m, bound, sentinel),
            arb_table(m, bound, sentinel),
            arb_table(m, bound, sentinel),
            Just(bound),
        )
    })
}

proptest! {
    #[test]
    fn min_sum_matches_enumeration((g, h, k, bound) in arb_triple(INF)) {
        let gh = min_sum_convolve(&g, &h, bound).unwrap();
        prop_assert_eq!(&gh, &naive_convolve(&g, &h, Mode::Min).unwrap());
        prop_assert_eq!(&gh, &min_sum_convolve(&h, &g, bound).unwrap());
        let left = min_sum_convolve(&gh, &k, 2 * bound).unwrap();
        let right = min_sum_convolve(&g, &min_sum_convolve(&h, &k, bound).unwrap(), 2 * bound).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn max_sum_matches_enumeration((g, h, k, bound) in arb_triple(NEG)) {
        let gh = max_sum_convolve(&g, &h, bound).unwrap();
        prop_assert_eq!(&gh, &naive_convolve(&g, &h, Mode::Max).unwrap());
        prop_assert_eq!(&gh, &max_sum_convolve(&h, &g, bound).unwrap());
        let e = SetFunctionTable::identity(g.ground_size(), Mode::Max);
        prop_assert_eq!(&max_sum_convolve(&g, &e, bound).unwrap(), &g);
        let left = max_sum_convolve(&gh, &k, 2 * bound).unwrap();
        let right = max_sum_convolve(&g, &max_sum_convolve(&h, &k, bound).unwrap(), 2 * bound).unwrap();
        prop_assert_eq!(left, right);
    }
}

#[test]
fn two_element_example() {
    let g = table(&[0, 1, 2, 5]);
    let h = table(&[0, 3, 1, 4]);
    let out = min_sum_convolve(&g, &h, 5).unwrap();
    assert_eq!(out.get(0b11), 2);
    assert_eq!(out.get(0b01), 1);
    let one = min_sum_convolve(&table(&[0, 1]), &table(&[0, 3]), 3).unwrap();
    assert_eq!(one.values(), &[0, 1]);
}

#[test]
fn unavailable_inputs_stay_unavailable() {
    let none = SetFunctionTable::<i32>::unavailable(3, Mode::Min);
    let some = table(&[0, 1, 2, 3, 4, 5, 6, 7]);
    let out = min_sum_convolve(&none, &some, 7).unwrap();
    assert!(out.values().iter().all(|&v| v == INF));
}

#[test]
fn rejects_malformed_tables() {
    assert_eq!(
        min_sum_convolve(&table(&[0, 1]), &table(&[0, 1, 2, 3]), 3),
        Err(ConvolutionError::GroundMismatch(1, 2))
    );
    assert!(matches!(
        min_sum_convolve(&table(&[0, 9]), &table(&[0, 1]), 3),
        Err(ConvolutionError::ValueOutOfRange { .. })
    ));
    assert!(matches!(
        SetFunctionTable::<i32>::new(2, vec![0; 3]),
        Err(ConvolutionError::BadLength { .. })
    ));
}
