use allrel::datagen::{extend_real_set, generate_xor_set, xor_class, XOR_RELEVANT};
use allrel::{Dataset, Origin};

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    sab / (saa * sbb).sqrt()
}

#[test]
fn xor_set_properties() {
    let n = 10_000;
    let data = generate_xor_set(n, 40, 21).unwrap();
    let ones = data.decision().iter().filter(|&&c| c == 1).count() as f64 / n as f64;
    assert!((ones - 0.5).abs() <= 0.02, "class balance {ones}");

    let (a, b) = (data.column(0), data.column(1));
    for i in 0..n {
        assert_eq!(data.decision()[i], xor_class(a[i], b[i]));
    }

    // each combination is exactly c1*A1 + c2*A2; recover (c1, c2) from two
    // objects and check the residual everywhere
    for j in 2..XOR_RELEVANT {
        let y = data.column(j);
        let det = a[0] * b[1] - a[1] * b[0];
        let c1 = (y[0] * b[1] - y[1] * b[0]) / det;
        let c2 = (a[0] * y[1] - a[1] * y[0]) / det;
        let worst = (0..n)
            .map(|i| (y[i] - c1 * a[i] - c2 * b[i]).abs())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-9, "attribute {j} residual {worst}");
    }

    let dec: Vec<f64> = data.decision().iter().map(|&c| c as f64).collect();
    let bound = 3.0 / (n as f64).sqrt();
    for j in XOR_RELEVANT..40 {
        assert!(correlation(data.column(j), &dec).abs() <= bound);
        assert_eq!(data.meta()[j].relevant, Some(false));
    }
    assert_eq!(data.name(0), "A1");
    assert_eq!(data.name(39), "A40");
    assert!(!data.notes().is_empty());
}

#[test]
fn xor_set_is_reproducible() {
    let a = generate_xor_set(300, 50, 4).unwrap();
    let b = generate_xor_set(300, 50, 4).unwrap();
    assert_eq!(a, b);
}

#[test]
fn extended_real_set() {
    let base = Dataset::from_columns(
        vec![("u", vec![1.0, 2.0, 3.0, 4.0]), ("v", vec![0.0, 0.0, 1.0, 1.0])],
        vec![0, 1, 0, 1],
        vec!["p".into(), "q".into()],
    )
    .unwrap();
    let sets = extend_real_set(&base, &[2, 10, 25], 7).unwrap();
    assert_eq!(sets.len(), 3);
    for (d, total) in sets.iter().zip([2, 10, 25]) {
        assert_eq!(d.n_attributes(), total);
        assert_eq!(d.column(0), base.column(0));
        assert_eq!(d.column(1), base.column(1));
        assert_eq!(d.meta()[0].relevant, None);
        assert_eq!(d.indices_with_origin(Origin::Noise).len(), total - 2);
        for j in 2..total {
            assert!(d.column(j).iter().all(|v| (0.0..1.0).contains(v)));
        }
    }
    assert!(extend_real_set(&base, &[1], 7).is_err());
}
