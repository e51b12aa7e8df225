const tf = require('@tensorflow/tfjs');
const { TOY_CONFIG } = require('./dist/config');
const { buildModel } = require('./dist/model');
const { readManifest } = require('./dist/data');
const { train } = require('./dist/train');

(async () => {
  const cfg = { ...TOY_CONFIG, seed: 1 };
  const { model } = buildModel(cfg);
  const manifest = readManifest('/tmp/dn_data/manifest.json');
  const t0 = Date.now();
  const res = await train(model, cfg, {
    steps: 60, datasetDir: '/tmp/dn_data', manifest, split: 'all',
  });
  const dt = (Date.now() - t0) / 1000;
  console.log(`60 steps in ${dt.toFixed(1)}s (${(dt/60*1000).toFixed(0)} ms/step)`);
  console.log('loss:', res.initialLoss.toExponential(3), '->', res.finalLoss.toExponential(3));
  console.log('reduction x', (res.initialLoss/res.finalLoss).toFixed(1));
})();
