"""Train the conditional flow on a task with a known posterior.

theta ~ N(0, I), observation x = theta + noise. The exact posterior is
Gaussian, so we can see directly how close neural posterior estimation gets
after a short training run.
"""

import numpy as np

from ucinfer.npe import TrainConfig, TrainingData, train

rng = np.random.default_rng(0)
d = 2
noise_sd = 0.5

theta_train = rng.standard_normal((8192, d))
x_train = theta_train + noise_sd * rng.standard_normal((8192, d))
theta_val = rng.standard_normal((2048, d))
x_val = theta_val + noise_sd * rng.standard_normal((2048, d))

model, curve = train(
    TrainingData(theta=theta_train, context=x_train, config_hash="toy"),
    TrainingData(theta=theta_val, context=x_val, config_hash="toy"),
    TrainConfig(epochs=30, batch_size=256, learning_rate=0.001, seed=3,
                hidden_sizes=(64, 64, 64)),
)
print(f"validation NLL: epoch 1 = {curve.val_nll[0]:.3f}, "
      f"best = {min(curve.val_nll):.3f} (epoch {curve.selected_epoch})")

# closed form: posterior covariance (1 + 1/sd^2)^-1 I, mean = shrinkage * x
shrink = 1.0 / (1.0 + noise_sd ** 2)
post_sd = np.sqrt(noise_sd ** 2 / (1.0 + noise_sd ** 2))

x_obs = np.array([1.2, -0.7])
samples = model.sample(x_obs, 8192, np.random.default_rng(1))
print(f"\nobservation x = {x_obs}")
print(f"posterior mean: flow {np.round(samples.mean(axis=0), 3)} "
      f"vs exact {np.round(shrink * x_obs, 3)}")
print(f"posterior sd:   flow {np.round(samples.std(axis=0), 3)} "
      f"vs exact [{post_sd:.3f} {post_sd:.3f}]")
