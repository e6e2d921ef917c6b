import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cepnet import cnn, framing, g711, trainer
from cepnet.audio_io import AudioSignal
from cepnet.cnn import CnnConfig
from cepnet.trainer import Dataset, EmptyDatasetError, PlateauSchedule, TrainSchedule

TOY = CnnConfig(input_len=8, kernel_len=3, feature_maps=4, seed=3)


def toy_data(rng, n, noise=0.1):
    """Smooth length-8 vectors and noisy copies of them."""
    t = np.arange(8)
    amp = rng.uniform(-1, 1, size=(n, 2))
    clean = amp[:, :1] * np.sin(2 * np.pi * t / 8) + amp[:, 1:] * np.cos(2 * np.pi * t / 16)
    return clean + noise * rng.standard_normal(clean.shape), clean


def test_toy_denoising_learns():
    rng = np.random.default_rng(0)
    x, y = toy_data(rng, 1024)
    xv, yv = toy_data(rng, 256)
    data = Dataset.from_arrays(x, y)
    val = Dataset.from_arrays(xv, yv)
    untrained = trainer.mse(cnn.CnnModel.init(TOY, data.norm_mean, data.norm_std), val)
    result = trainer.train(data, val, TOY, TrainSchedule(lr=2e-3, max_epochs=30))
    assert trainer.mse(result.model, val) < 0.25 * untrained
    assert result.log[result.best_epoch - 1].val_mse == min(r.val_mse for r in result.log)


def test_constant_validation_halves_then_stops():
    rng = np.random.default_rng(1)
    x, y = toy_data(rng, 32)
    data = Dataset.from_arrays(x, y)
    result = trainer.train(data, data, TOY, TrainSchedule(lr=1e-3, max_epochs=40),
                           evaluator=lambda m: 1.0)
    lrs = [r.lr for r in result.log]
    assert lrs[:3] == [1e-3] * 3
    assert lrs[3] == 5e-4 and lrs[5] == 2.5e-4
    # epoch 1 is the only improvement; 16 stagnant epochs follow
    assert len(result.log) == 17
    assert result.best_epoch == 1


def test_plateau_ties_stagnate():
    p = PlateauSchedule(2, 16)
    assert p.update(1.0) == (True, False, False)
    assert p.update(1.0) == (False, False, False)
    assert p.update(1.0) == (False, True, False)
    assert p.update(0.5) == (True, False, False)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 10.0), min_size=1, max_size=60))
def test_plateau_stops_exactly_after_patience(vals):
    p = PlateauSchedule(2, 16)
    best, since = np.inf, 0
    for v in vals:
        improved, _, stop = p.update(v)
        if v < best:
            best, since = v, 0
        else:
            since += 1
        assert improved == (since == 0)
        assert stop == (since >= 16)


def test_one_epoch_update_count():
    rng = np.random.default_rng(2)
    x, y = toy_data(rng, 50)
    data = Dataset.from_arrays(x, y)
    result = trainer.train(data, data, TOY, TrainSchedule(max_epochs=1))
    assert result.num_updates == 50 // 16
    assert len(result.log) == 1


def test_too_small_and_empty_datasets():
    rng = np.random.default_rng(3)
    x, y = toy_data(rng, 10)
    with pytest.raises(ValueError):
        trainer.train(Dataset.from_arrays(x, y), Dataset.from_arrays(x, y), TOY)
    with pytest.raises(EmptyDatasetError):
        Dataset.from_arrays(np.zeros((0, 8)), np.zeros((0, 8)))
    silent = AudioSignal(np.zeros(8000), 8000)
    with pytest.raises(EmptyDatasetError):
        trainer.prepare_dataset([silent], [silent], "s3", "cepstral")


def test_frame_length_mismatch():
    rng = np.random.default_rng(4)
    x, y = toy_data(rng, 32)
    data = Dataset.from_arrays(x, y)
    with pytest.raises(ValueError):
        trainer.train(data, data, CnnConfig(input_len=16, kernel_len=3, feature_maps=2))


def test_zero_std_becomes_one():
    x = np.ones((5, 4))
    x[:, 1] = np.arange(5)
    mean, std = trainer.normalization_stats(x)
    assert std[0] == 1.0 and std[1] == pytest.approx(np.std(np.arange(5)))


def test_uncoded_pairs_have_equal_inputs_and_targets(speech):
    data = trainer.prepare_dataset([speech], [speech], "s3", "cepstral")
    assert data.frame_len == 32
    np.testing.assert_array_equal(data.input_frames, data.target_frames)


def test_vad_recount(speech):
    coded = g711.code_signal(speech, "alaw")[0]
    st3 = framing.get_structure("s3")
    nw, p, ns = st3.geometry(8000)
    x = speech.samples
    padded = np.concatenate([np.zeros(nw - ns), x])
    file_ms = np.mean(x ** 2)
    count = 0
    # frames continue until the delayed output covers the whole file
    for s in range(0, len(x) + st3.delay_samples(8000), ns):
        seg = padded[s:s + nw]
        seg = np.concatenate([seg, np.zeros(nw - len(seg))])
        count += np.mean(seg ** 2) / file_ms > 0.1
    data = trainer.prepare_dataset([speech], [coded], st3, "time", trainer.DatasetConfig(0.1))
    assert len(data) == count
    assert data.frame_len == p


def test_prepare_rejects_misaligned_pairs(speech):
    short = AudioSignal(speech.samples[:-5], 8000)
    with pytest.raises(ValueError):
        trainer.prepare_dataset([speech], [short], "s3", "time")
    with pytest.raises(ValueError):
        trainer.prepare_dataset([speech], [], "s3", "time")


def test_training_is_deterministic():
    rng = np.random.default_rng(5)
    x, y = toy_data(rng, 96)
    data = Dataset.from_arrays(x, y)
    sched = TrainSchedule(max_epochs=3, seed=9)
    a = trainer.train(data, data, TOY, sched)
    b = trainer.train(data, data, TOY, sched)
    for wa, wb in zip(a.model.parameters(), b.model.parameters()):
        np.testing.assert_array_equal(wa, wb)
    assert a.log == b.log


def test_log_round_trip(tmp_path):
    log = [trainer.EpochRecord(1, 0.1 / 3, 2.0 / 7, 5e-4), trainer.EpochRecord(2, 1e-9, 0.5, 2.5e-4)]
    trainer.write_log(log, tmp_path / "log.csv")
    assert trainer.read_log(tmp_path / "log.csv") == log
