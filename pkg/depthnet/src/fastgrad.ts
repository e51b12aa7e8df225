/**
 * Optimized Conv2DBackpropFilter for the tfjs CPU backend.
 *
 * The stock kernel iterates (filter x channels x output) with per-element
 * TensorBuffer.get() calls, which makes the filter gradient ~20x slower
 * than the forward conv and dominates training time. This drop-in
 * replacement computes the same sums with flat typed-array indexing and a
 * channels-contiguous inner loop. Registered once at import; only the
 * channels-last, dilation-1 case is implemented (all this model uses),
 * anything else falls back to the original kernel.
 */

import * as tf from "@tensorflow/tfjs";

let installed = false;

export function installFastConvBackpropFilter(): void {
  if (installed) return;
  installed = true;

  const original = tf.getKernel("Conv2DBackpropFilter", "cpu");
  if (original == null) return;
  const originalFunc = original.kernelFunc;

  const fastFunc = (args: {
    inputs: Record<string, tf.TensorInfo>;
    backend: unknown;
    attrs?: Record<string, unknown>;
  }) => {
    const { inputs, backend, attrs } = args;
    const x = inputs["x"];
    const dy = inputs["dy"];
    const a = attrs as {
      strides: number | [number, number];
      pad: number | "valid" | "same";
      dataFormat: string;
      dimRoundingMode?: string;
      filterShape: [number, number, number, number];
    };
    const dataFormat = tf.backend_util.convertConv2DDataFormat(
      a.dataFormat as "NHWC" | "NCHW",
    );
    const convInfo = tf.backend_util.computeConv2DInfo(
      x.shape as [number, number, number, number],
      a.filterShape,
      a.strides,
      1,
      a.pad,
      a.dimRoundingMode as "floor" | "round" | "ceil" | undefined,
      false,
      dataFormat,
    );
    if (convInfo.dataFormat !== "channelsLast") {
      return originalFunc(args as never);
    }

    const cpu = backend as {
      data: { get(id: unknown): { values: Float32Array } };
      makeTensorInfo(shape: number[], dtype: string, values: Float32Array): tf.TensorInfo;
    };
    const xVals = cpu.data.get(x.dataId).values;
    const dyVals = cpu.data.get(dy.dataId).values;
    const {
      batchSize, inHeight, inWidth, inChannels,
      outHeight, outWidth, outChannels,
      filterHeight, filterWidth, strideHeight, strideWidth,
    } = convInfo;
    const topPad = convInfo.padInfo.top;
    const leftPad = convInfo.padInfo.left;

    const dW = new Float32Array(filterHeight * filterWidth * inChannels * outChannels);
    const xsB = inHeight * inWidth * inChannels;
    const xsH = inWidth * inChannels;
    const dsB = outHeight * outWidth * outChannels;
    const dsH = outWidth * outChannels;

    for (let b = 0; b < batchSize; ++b) {
      for (let yR = 0; yR < outHeight; ++yR) {
        const xRBase = yR * strideHeight - topPad;
        for (let yC = 0; yC < outWidth; ++yC) {
          const xCBase = yC * strideWidth - leftPad;
          const dyOff = b * dsB + yR * dsH + yC * outChannels;
          for (let wR = 0; wR < filterHeight; ++wR) {
            const xR = xRBase + wR;
            if (xR < 0 || xR >= inHeight) continue;
            const rowOff = b * xsB + xR * xsH;
            const wRowOff = wR * filterWidth;
            for (let wC = 0; wC < filterWidth; ++wC) {
              const xC = xCBase + wC;
              if (xC < 0 || xC >= inWidth) continue;
              const xOff = rowOff + xC * inChannels;
              const wOff = (wRowOff + wC) * inChannels * outChannels;
              for (let d1 = 0; d1 < inChannels; ++d1) {
                const xv = xVals[xOff + d1];
                const base = wOff + d1 * outChannels;
                for (let d2 = 0; d2 < outChannels; ++d2) {
                  dW[base + d2] += xv * dyVals[dyOff + d2];
                }
              }
            }
          }
        }
      }
    }
    return cpu.makeTensorInfo(
      convInfo.filterShape as unknown as number[], "float32", dW,
    );
  };

  tf.unregisterKernel("Conv2DBackpropFilter", "cpu");
  tf.registerKernel({
    kernelName: "Conv2DBackpropFilter",
    backendName: "cpu",
    kernelFunc: fastFunc as never,
  });
}
