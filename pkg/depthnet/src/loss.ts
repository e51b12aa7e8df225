/**
 * Training losses on normalized depth.
 *
 * mse is the plain mean squared error (the proposed model's loss).
 * cdd_blend is the baseline configuration: 0.9 * (1 - SSIM) + 0.1 * MSE,
 * with SSIM computed globally per image (population statistics, dynamic
 * range 1) and averaged over the batch.
 */

import * as tf from "@tensorflow/tfjs";

export function mseLoss(pred: tf.Tensor4D, target: tf.Tensor4D): tf.Scalar {
  return tf.tidy(() => pred.sub(target).square().mean() as tf.Scalar);
}

export function ssimGlobal(pred: tf.Tensor4D, target: tf.Tensor4D): tf.Scalar {
  return tf.tidy(() => {
    const c1 = 0.01 ** 2;
    const c2 = 0.03 ** 2;
    const axes = [1, 2, 3];
    const muX = pred.mean(axes, true);
    const muY = target.mean(axes, true);
    const varX = pred.square().mean(axes, true).sub(muX.square());
    const varY = target.square().mean(axes, true).sub(muY.square());
    const cov = pred.mul(target).mean(axes, true).sub(muX.mul(muY));
    const num = muX.mul(muY).mul(2).add(c1).mul(cov.mul(2).add(c2));
    const den = muX.square().add(muY.square()).add(c1).mul(varX.add(varY).add(c2));
    return num.div(den).mean() as tf.Scalar;
  });
}

export function cddBlendLoss(pred: tf.Tensor4D, target: tf.Tensor4D): tf.Scalar {
  return tf.tidy(() => {
    const ssim = ssimGlobal(pred, target);
    const structural = tf.scalar(1).sub(ssim).mul(0.9);
    return structural.add(mseLoss(pred, target).mul(0.1)) as tf.Scalar;
  });
}

export function lossFn(
  kind: "mse" | "cdd_blend",
): (pred: tf.Tensor4D, target: tf.Tensor4D) => tf.Scalar {
  return kind === "mse" ? mseLoss : cddBlendLoss;
}
