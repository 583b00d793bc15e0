"""Watch the implicit-regularization penalty oscillate with the schedule.

Trains a small MLP on two moons under a 50% budget with the oscillatory
schedule (5% / 95% phases) and probes R every epoch. The penalty spikes in
low-ratio epochs because the volumetric factor (1-p)/p jumps from ~0.05 to
19, so each period delivers a burst of implicit regularization while the
high phase keeps the average data volume on budget.
"""

from oscisel.trainer import RunConfig, run_training


def main():
    cfg = RunConfig(
        dataset={"kind": "two_moons", "n_train": 500, "n_test": 200,
                 "noise": 0.2},
        model={"kind": "mlp", "hidden": 16},
        epochs=12,
        batch_size=32,
        learning_rate=0.3,
        target_ratio=0.5,
        margin=0.05,
        policy="hard_mining",
        seed=0,
        eval_every=12,
        probe_every=1,
    )
    result = run_training(cfg)

    print(f"{'epoch':>5} {'p_t':>5} {'selected':>8} {'train_loss':>10} "
          f"{'R':>10}")
    for m in result.metrics:
        print(
            f"{m.epoch:>5d} {m.p_t:>5.2f} {m.n_selected:>8d} "
            f"{m.train_loss:>10.4f} {m.R_estimate:>10.2e}"
        )

    rs = [m.R_estimate for m in result.metrics]
    wins = sum(1 for t in range(0, cfg.epochs, 2) if rs[t] > rs[t + 1])
    print(f"\nlow-phase R exceeded high-phase R in {wins}/{cfg.epochs // 2} "
          f"periods")
    print(f"realized data volume: "
          f"{result.ledger.summary()['realized_ratio']:.3f} "
          f"(target {cfg.target_ratio})")


if __name__ == "__main__":
    main()
