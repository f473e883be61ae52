//! Forward and backward passes for the ops the regressor needs: conv2d,
//! relu, average pooling, global mean+max pooling, linear, MSE loss.
//!
//! Convolutions run as im2col + sgemm. Every backward takes the original
//! inputs plus the upstream gradient and returns gradients in input order.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;

fn dims4(t: &Tensor, what: &str) -> Result<(usize, usize, usize, usize)> {
    match t.shape[..] {
        [a, b, c, d] => Ok((a, b, c, d)),
        _ => Err(Error::Shape(format!(
            "{what} must be 4-d, got {:?}",
            t.shape
        ))),
    }
}

pub fn conv2d_out_dims(h: usize, w: usize, kh: usize, kw: usize, pad: usize, stride: usize) -> (usize, usize) {
    (
        (h + 2 * pad - kh) / stride + 1,
        (w + 2 * pad - kw) / stride + 1,
    )
}

/// im2col for one image: (C*kh*kw) x (Ho*Wo), row-major.
fn im2col(
    x: &[f32],
    c: usize,
    h: usize,
    w: usize,
    kh: usize,
    kw: usize,
    pad: usize,
    stride: usize,
    ho: usize,
    wo: usize,
) -> Vec<f32> {
    let mut col = vec![0.0f32; c * kh * kw * ho * wo];
    let cols = ho * wo;
    for ci in 0..c {
        for ki in 0..kh {
            for kj in 0..kw {
                let row = (ci * kh + ki) * kw + kj;
                let dst = &mut col[row * cols..(row + 1) * cols];
                for oi in 0..ho {
                    let ii = (oi * stride + ki) as isize - pad as isize;
                    if ii < 0 || ii >= h as isize {
                        continue;
                    }
                    let src_base = (ci * h + ii as usize) * w;
                    for oj in 0..wo {
                        let jj = (oj * stride + kj) as isize - pad as isize;
                        if jj >= 0 && jj < w as isize {
                            dst[oi * wo + oj] = x[src_base + jj as usize];
                        }
                    }
                }
            }
        }
    }
    col
}

/// Scatter a col matrix back into image layout, accumulating overlaps.
#[allow(clippy::too_many_arguments)]
fn col2im(
    col: &[f32],
    c: usize,
    h: usize,
    w: usize,
    kh: usize,
    kw: usize,
    pad: usize,
    stride: usize,
    ho: usize,
    wo: usize,
    out: &mut [f32],
) {
    let cols = ho * wo;
    for ci in 0..c {
        for ki in 0..kh {
            for kj in 0..kw {
                let row = (ci * kh + ki) * kw + kj;
                let src = &col[row * cols..(row + 1) * cols];
                for oi in 0..ho {
                    let ii = (oi * stride + ki) as isize - pad as isize;
                    if ii < 0 || ii >= h as isize {
                        continue;
                    }
                    let dst_base = (ci * h + ii as usize) * w;
                    for oj in 0..wo {
                        let jj = (oj * stride + kj) as isize - pad as isize;
                        if jj >= 0 && jj < w as isize {
                            out[dst_base + jj as usize] += src[oi * wo + oj];
                        }
                    }
                }
            }
        }
    }
}

/// Cross-correlation of x [N,C,H,W] with kernels k [O,C,kh,kw] plus bias [O].
pub fn conv2d_forward(
    x: &Tensor,
    k: &Tensor,
    bias: Option<&Tensor>,
    pad: usize,
    stride: usize,
) -> Result<Tensor> {
    let (n, c, h, w) = dims4(x, "conv input")?;
    let (o, kc, kh, kw) = dims4(k, "conv kernel")?;
    if kc != c {
        return Err(Error::Shape(format!(
            "kernel channels {kc} != input channels {c}"
        )));
    }
    if h + 2 * pad < kh || w + 2 * pad < kw {
        return Err(Error::Shape("kernel larger than padded input".into()));
    }
    if let Some(b) = bias {
        if b.shape != [o] {
            return Err(Error::Shape("bias shape must be [out_channels]".into()));
        }
    }
    let (ho, wo) = conv2d_out_dims(h, w, kh, kw, pad, stride);
    let mut out = Tensor::zeros(&[n, o, ho, wo]);
    let kmat = ArrayView2::from_shape((o, c * kh * kw), &k.data).unwrap();
    for ni in 0..n {
        let img = &x.data[ni * c * h * w..(ni + 1) * c * h * w];
        let col = im2col(img, c, h, w, kh, kw, pad, stride, ho, wo);
        let colm = ArrayView2::from_shape((c * kh * kw, ho * wo), &col).unwrap();
        let y: Array2<f32> = kmat.dot(&colm);
        let dst = &mut out.data[ni * o * ho * wo..(ni + 1) * o * ho * wo];
        dst.copy_from_slice(y.as_slice().unwrap());
        if let Some(b) = bias {
            for oi in 0..o {
                for v in &mut dst[oi * ho * wo..(oi + 1) * ho * wo] {
                    *v += b.data[oi];
                }
            }
        }
    }
    Ok(out)
}

/// Gradients of conv2d w.r.t. input, kernel, and bias.
pub fn conv2d_backward(
    x: &Tensor,
    k: &Tensor,
    pad: usize,
    stride: usize,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let (n, c, h, w) = dims4(x, "conv input")?;
    let (o, _, kh, kw) = dims4(k, "conv kernel")?;
    let (ho, wo) = conv2d_out_dims(h, w, kh, kw, pad, stride);
    if grad_out.shape != [n, o, ho, wo] {
        return Err(Error::Shape("conv grad_out shape mismatch".into()));
    }
    let mut dx = Tensor::zeros(&x.shape);
    let mut dk = Array2::<f32>::zeros((o, c * kh * kw));
    let mut db = Tensor::zeros(&[o]);
    let kmat = ArrayView2::from_shape((o, c * kh * kw), &k.data).unwrap();
    for ni in 0..n {
        let img = &x.data[ni * c * h * w..(ni + 1) * c * h * w];
        let dy = ArrayView2::from_shape(
            (o, ho * wo),
            &grad_out.data[ni * o * ho * wo..(ni + 1) * o * ho * wo],
        )
        .unwrap();
        let col = im2col(img, c, h, w, kh, kw, pad, stride, ho, wo);
        let colm = ArrayView2::from_shape((c * kh * kw, ho * wo), &col).unwrap();
        dk = dk + dy.dot(&colm.t());
        let dcol: Array2<f32> = kmat.t().dot(&dy);
        col2im(
            dcol.as_slice().unwrap(),
            c,
            h,
            w,
            kh,
            kw,
            pad,
            stride,
            ho,
            wo,
            &mut dx.data[ni * c * h * w..(ni + 1) * c * h * w],
        );
        for oi in 0..o {
            db.data[oi] += dy.row(oi).sum();
        }
    }
    let dk = Tensor::from_vec(&k.shape, dk.into_raw_vec_and_offset().0)?;
    Ok((dx, dk, db))
}

pub fn relu_forward(x: &Tensor) -> Tensor {
    Tensor {
        shape: x.shape.clone(),
        data: x.data.iter().map(|&v| v.max(0.0)).collect(),
    }
}

pub fn relu_backward(x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    if x.shape != grad_out.shape {
        return Err(Error::Shape("relu grad shape mismatch".into()));
    }
    Ok(Tensor {
        shape: x.shape.clone(),
        data: x
            .data
            .iter()
            .zip(&grad_out.data)
            .map(|(&v, &g)| if v > 0.0 { g } else { 0.0 })
            .collect(),
    })
}

/// size x size average pooling with stride = size; trailing rows/columns that
/// do not fill a full cell are dropped.
pub fn avg_pool2d_forward(x: &Tensor, size: usize) -> Result<Tensor> {
    let (n, c, h, w) = dims4(x, "pool input")?;
    let (ho, wo) = (h / size, w / size);
    if ho == 0 || wo == 0 {
        return Err(Error::Shape("input smaller than pool size".into()));
    }
    let mut out = Tensor::zeros(&[n, c, ho, wo]);
    let inv = 1.0 / (size * size) as f32;
    for ni in 0..n {
        for ci in 0..c {
            let src = &x.data[(ni * c + ci) * h * w..(ni * c + ci + 1) * h * w];
            let dst = &mut out.data[(ni * c + ci) * ho * wo..(ni * c + ci + 1) * ho * wo];
            for oi in 0..ho {
                for oj in 0..wo {
                    let mut acc = 0.0f32;
                    for di in 0..size {
                        for dj in 0..size {
                            acc += src[(oi * size + di) * w + oj * size + dj];
                        }
                    }
                    dst[oi * wo + oj] = acc * inv;
                }
            }
        }
    }
    Ok(out)
}

pub fn avg_pool2d_backward(x: &Tensor, size: usize, grad_out: &Tensor) -> Result<Tensor> {
    let (n, c, h, w) = dims4(x, "pool input")?;
    let (ho, wo) = (h / size, w / size);
    if grad_out.shape != [n, c, ho, wo] {
        return Err(Error::Shape("pool grad_out shape mismatch".into()));
    }
    let mut dx = Tensor::zeros(&x.shape);
    let inv = 1.0 / (size * size) as f32;
    for ni in 0..n {
        for ci in 0..c {
            let g = &grad_out.data[(ni * c + ci) * ho * wo..(ni * c + ci + 1) * ho * wo];
            let dst = &mut dx.data[(ni * c + ci) * h * w..(ni * c + ci + 1) * h * w];
            for oi in 0..ho {
                for oj in 0..wo {
                    let gv = g[oi * wo + oj] * inv;
                    for di in 0..size {
                        for dj in 0..size {
                            dst[(oi * size + di) * w + oj * size + dj] += gv;
                        }
                    }
                }
            }
        }
    }
    Ok(dx)
}

/// Per-channel mean over HxW concatenated with per-channel max: [N, 2C].
pub fn global_mean_max_pool_forward(x: &Tensor) -> Result<Tensor> {
    let (n, c, h, w) = dims4(x, "global pool input")?;
    let hw = h * w;
    let mut out = Tensor::zeros(&[n, 2 * c]);
    for ni in 0..n {
        for ci in 0..c {
            let src = &x.data[(ni * c + ci) * hw..(ni * c + ci + 1) * hw];
            let mean = src.iter().sum::<f32>() / hw as f32;
            let max = src.iter().cloned().fold(f32::NEG_INFINITY, f32::max);
            out.data[ni * 2 * c + ci] = mean;
            out.data[ni * 2 * c + c + ci] = max;
        }
    }
    Ok(out)
}

pub fn global_mean_max_pool_backward(x: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    let (n, c, h, w) = dims4(x, "global pool input")?;
    if grad_out.shape != [n, 2 * c] {
        return Err(Error::Shape("global pool grad_out shape mismatch".into()));
    }
    let hw = h * w;
    let mut dx = Tensor::zeros(&x.shape);
    for ni in 0..n {
        for ci in 0..c {
            let src = &x.data[(ni * c + ci) * hw..(ni * c + ci + 1) * hw];
            let g_mean = grad_out.data[ni * 2 * c + ci] / hw as f32;
            let g_max = grad_out.data[ni * 2 * c + c + ci];
            // max gradient flows to the first argmax element
            let argmax = src
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap();
            let dst = &mut dx.data[(ni * c + ci) * hw..(ni * c + ci + 1) * hw];
            for v in dst.iter_mut() {
                *v += g_mean;
            }
            dst[argmax] += g_max;
        }
    }
    Ok(dx)
}

/// x [N,I] times w [O,I] transposed, plus bias [O].
pub fn linear_forward(x: &Tensor, w: &Tensor, bias: &Tensor) -> Result<Tensor> {
    let (n, i) = match x.shape[..] {
        [n, i] => (n, i),
        _ => return Err(Error::Shape("linear input must be 2-d".into())),
    };
    let (o, wi) = match w.shape[..] {
        [o, wi] => (o, wi),
        _ => return Err(Error::Shape("linear weight must be 2-d".into())),
    };
    if wi != i || bias.shape != [o] {
        return Err(Error::Shape(format!(
            "linear shapes: x {:?} w {:?} b {:?}",
            x.shape, w.shape, bias.shape
        )));
    }
    let xm = ArrayView2::from_shape((n, i), &x.data).unwrap();
    let wm = ArrayView2::from_shape((o, i), &w.data).unwrap();
    let mut y = xm.dot(&wm.t());
    for mut row in y.rows_mut() {
        for (v, b) in row.iter_mut().zip(&bias.data) {
            *v += b;
        }
    }
    Tensor::from_vec(&[n, o], y.into_raw_vec_and_offset().0)
}

pub fn linear_backward(
    x: &Tensor,
    w: &Tensor,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let (n, i) = (x.shape[0], x.shape[1]);
    let o = w.shape[0];
    if grad_out.shape != [n, o] {
        return Err(Error::Shape("linear grad_out shape mismatch".into()));
    }
    let xm = ArrayView2::from_shape((n, i), &x.data).unwrap();
    let wm = ArrayView2::from_shape((o, i), &w.data).unwrap();
    let gm = ArrayView2::from_shape((n, o), &grad_out.data).unwrap();
    let dx = gm.dot(&wm);
    let dw = gm.t().dot(&xm);
    let mut db = Tensor::zeros(&[o]);
    for row in gm.rows() {
        for (d, &g) in db.data.iter_mut().zip(row.iter()) {
            *d += g;
        }
    }
    Ok((
        Tensor::from_vec(&x.shape, dx.into_raw_vec_and_offset().0)?,
        Tensor::from_vec(&w.shape, dw.into_raw_vec_and_offset().0)?,
        db,
    ))
}

/// Mean squared error over flattened tensors.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<f64> {
    if pred.shape != target.shape {
        return Err(Error::Shape("mse shapes differ".into()));
    }
    if pred.data.is_empty() {
        return Err(Error::InvalidInput("mse on empty tensors".into()));
    }
    Ok(pred
        .data
        .iter()
        .zip(&target.data)
        .map(|(&p, &t)| (p as f64 - t as f64).powi(2))
        .sum::<f64>()
        / pred.data.len() as f64)
}

/// d(mse)/d(pred) = 2 (p - t) / n.
pub fn mse_grad(pred: &Tensor, target: &Tensor) -> Result<Tensor> {
    if pred.shape != target.shape {
        return Err(Error::Shape("mse shapes differ".into()));
    }
    let n = pred.data.len() as f32;
    Ok(Tensor {
        shape: pred.shape.clone(),
        data: pred
            .data
            .iter()
            .zip(&target.data)
            .map(|(&p, &t)| 2.0 * (p - t) / n)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_tensor(shape: &[usize], rng: &mut impl Rng) -> Tensor {
        Tensor {
            shape: shape.to_vec(),
            data: (0..shape.iter().product())
                .map(|_| rng.gen_range(-1.0f32..1.0))
                .collect(),
        }
    }

    /// Central finite-difference gradient of `f` w.r.t. `t`, all elements.
    fn finite_diff(t: &mut Tensor, mut f: impl FnMut(&Tensor) -> f64) -> Vec<f64> {
        let h = 1e-3f32; // f32 forward pass; larger h keeps rounding noise down
        let mut out = Vec::with_capacity(t.data.len());
        for i in 0..t.data.len() {
            let orig = t.data[i];
            t.data[i] = orig + h;
            let hi = f(t);
            t.data[i] = orig - h;
            let lo = f(t);
            t.data[i] = orig;
            out.push((hi - lo) / (2.0 * h as f64));
        }
        out
    }

    fn assert_close(analytic: &[f32], numeric: &[f64], what: &str) {
        for (i, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
            let a = a as f64;
            let tol = 1e-3 * n.abs().max(a.abs()) + 1e-5;
            assert!(
                (a - n).abs() <= tol.max(2e-3), // absolute slack for f32 forward noise
                "{what}[{i}]: analytic {a} vs numeric {n}"
            );
        }
    }

    #[test]
    fn conv_identity_kernel() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = rand_tensor(&[1, 1, 4, 5], &mut rng);
        let k = Tensor::from_vec(&[1, 1, 1, 1], vec![1.0]).unwrap();
        let y = conv2d_forward(&x, &k, None, 0, 1).unwrap();
        assert_eq!(y.shape, x.shape);
        assert_eq!(y.data, x.data);
    }

    #[test]
    fn conv_all_ones_on_constant() {
        let x = Tensor::from_vec(&[1, 1, 5, 5], vec![2.0; 25]).unwrap();
        let k = Tensor::from_vec(&[1, 1, 3, 3], vec![1.0; 9]).unwrap();
        let y = conv2d_forward(&x, &k, None, 0, 1).unwrap();
        assert_eq!(y.shape, vec![1, 1, 3, 3]);
        assert!(y.data.iter().all(|&v| (v - 18.0).abs() < 1e-6));
    }

    #[test]
    fn conv_matches_quadruple_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let x = rand_tensor(&[1, 1, 4, 4], &mut rng);
        let k = rand_tensor(&[1, 1, 2, 2], &mut rng);
        let y = conv2d_forward(&x, &k, None, 0, 1).unwrap();
        // direct quadruple loop
        for oi in 0..3 {
            for oj in 0..3 {
                let mut acc = 0.0f32;
                for ki in 0..2 {
                    for kj in 0..2 {
                        acc += x.data[(oi + ki) * 4 + oj + kj] * k.data[ki * 2 + kj];
                    }
                }
                assert!((y.data[oi * 3 + oj] - acc).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn conv_shape_mismatch_errors() {
        let x = Tensor::zeros(&[1, 2, 4, 4]);
        let k = Tensor::zeros(&[1, 3, 3, 3]);
        assert!(conv2d_forward(&x, &k, None, 1, 1).is_err());
    }

    #[test]
    fn conv_gradients_match_finite_differences() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x = rand_tensor(&[2, 2, 5, 6], &mut rng);
            let mut k = rand_tensor(&[3, 2, 3, 3], &mut rng);
            let mut b = rand_tensor(&[3], &mut rng);
            let target = rand_tensor(&[2, 3, 5, 6], &mut rng);
            let loss = |x: &Tensor, k: &Tensor, b: &Tensor| {
                let y = conv2d_forward(x, k, Some(b), 1, 1).unwrap();
                mse_loss(&y, &target).unwrap()
            };
            let y = conv2d_forward(&x, &k, Some(&b), 1, 1).unwrap();
            let dy = mse_grad(&y, &target).unwrap();
            let (dx, dk, db) = conv2d_backward(&x, &k, 1, 1, &dy).unwrap();

            let k2 = k.clone();
            let b2 = b.clone();
            let num_dx = finite_diff(&mut x, |t| loss(t, &k2, &b2));
            assert_close(&dx.data, &num_dx, "conv dx");
            let x2 = x.clone();
            let num_dk = finite_diff(&mut k, |t| loss(&x2, t, &b2));
            assert_close(&dk.data, &num_dk, "conv dk");
            let num_db = finite_diff(&mut b, |t| loss(&x2, &k2, t));
            assert_close(&db.data, &num_db, "conv db");
        }
    }

    #[test]
    fn relu_gradient_matches_finite_differences() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let mut x = rand_tensor(&[3, 7], &mut rng);
            // keep values away from the kink where FD is ill-defined
            for v in &mut x.data {
                if v.abs() < 0.05 {
                    *v += 0.1;
                }
            }
            let target = rand_tensor(&[3, 7], &mut rng);
            let y = relu_forward(&x);
            let dy = mse_grad(&y, &target).unwrap();
            let dx = relu_backward(&x, &dy).unwrap();
            let num = finite_diff(&mut x, |t| {
                mse_loss(&relu_forward(t), &target).unwrap()
            });
            assert_close(&dx.data, &num, "relu dx");
        }
    }

    #[test]
    fn avg_pool_gradient_matches_finite_differences() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
            let mut x = rand_tensor(&[2, 3, 4, 6], &mut rng);
            let target = rand_tensor(&[2, 3, 2, 3], &mut rng);
            let y = avg_pool2d_forward(&x, 2).unwrap();
            let dy = mse_grad(&y, &target).unwrap();
            let dx = avg_pool2d_backward(&x, 2, &dy).unwrap();
            let num = finite_diff(&mut x, |t| {
                mse_loss(&avg_pool2d_forward(t, 2).unwrap(), &target).unwrap()
            });
            assert_close(&dx.data, &num, "avg_pool dx");
        }
    }

    #[test]
    fn avg_pool_drops_odd_remainder() {
        let x = Tensor::zeros(&[1, 1, 5, 7]);
        let y = avg_pool2d_forward(&x, 2).unwrap();
        assert_eq!(y.shape, vec![1, 1, 2, 3]);
    }

    #[test]
    fn global_pool_gradient_matches_finite_differences() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(300 + seed);
            let mut x = rand_tensor(&[2, 4, 3, 5], &mut rng);
            // separate each channel's max from the runner-up so the FD probe
            // cannot flip the argmax
            for chan in x.data.chunks_mut(15) {
                let argmax = (0..15).max_by(|&a, &b| chan[a].total_cmp(&chan[b])).unwrap();
                chan[argmax] += 0.5;
            }
            let target = rand_tensor(&[2, 8], &mut rng);
            let y = global_mean_max_pool_forward(&x).unwrap();
            let dy = mse_grad(&y, &target).unwrap();
            let dx = global_mean_max_pool_backward(&x, &dy).unwrap();
            let num = finite_diff(&mut x, |t| {
                mse_loss(&global_mean_max_pool_forward(t).unwrap(), &target).unwrap()
            });
            assert_close(&dx.data, &num, "global pool dx");
        }
    }

    #[test]
    fn global_pool_layout_is_mean_then_max() {
        let x = Tensor::from_vec(&[1, 2, 1, 2], vec![1.0, 3.0, -1.0, 5.0]).unwrap();
        let y = global_mean_max_pool_forward(&x).unwrap();
        assert_eq!(y.data, vec![2.0, 2.0, 3.0, 5.0]);
    }

    #[test]
    fn linear_gradients_match_finite_differences() {
        for seed in 0..20u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(400 + seed);
            let mut x = rand_tensor(&[4, 6], &mut rng);
            let mut w = rand_tensor(&[3, 6], &mut rng);
            let mut b = rand_tensor(&[3], &mut rng);
            let target = rand_tensor(&[4, 3], &mut rng);
            let loss = |x: &Tensor, w: &Tensor, b: &Tensor| {
                mse_loss(&linear_forward(x, w, b).unwrap(), &target).unwrap()
            };
            let y = linear_forward(&x, &w, &b).unwrap();
            let dy = mse_grad(&y, &target).unwrap();
            let (dx, dw, db) = linear_backward(&x, &w, &dy).unwrap();
            let (w2, b2) = (w.clone(), b.clone());
            assert_close(&dx.data, &finite_diff(&mut x, |t| loss(t, &w2, &b2)), "linear dx");
            let x2 = x.clone();
            assert_close(&dw.data, &finite_diff(&mut w, |t| loss(&x2, t, &b2)), "linear dw");
            assert_close(&db.data, &finite_diff(&mut b, |t| loss(&x2, &w2, t)), "linear db");
        }
    }

    #[test]
    fn mse_basics() {
        let a = Tensor::from_vec(&[2], vec![1.0, 2.0]).unwrap();
        let b = Tensor::from_vec(&[2], vec![0.0, 0.0]).unwrap();
        assert_eq!(mse_loss(&a, &a).unwrap(), 0.0);
        assert!((mse_loss(&a, &b).unwrap() - 2.5).abs() < 1e-12);
    }
}
