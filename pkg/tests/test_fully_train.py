import numpy as np
import pytest

from music_captioning.errors import DataError, NumericalError, ShapeError, StaleCacheError
from music_captioning.fully_train import (
    AudioSummarizerParams,
    FullyTrainBundle,
    LabelHeadParams,
    RawTrack,
    audio_summarize,
    audio_summarize_backward,
    bundle_loss,
    label_head_backward,
    label_head_forward,
    multitask_loss,
    text_summarize,
    text_summarize_backward,
    track_features,
)
from music_captioning.nn import (
    GruCellParams,
    component_rng,
    gradient_check,
    gru_cell_forward,
    max_pool2x2_backward,
    max_pool2x2_forward,
)


def random_audio(output_dim: int, seed: int) -> AudioSummarizerParams:
    params = AudioSummarizerParams.initialize(output_dim, component_rng(seed, "test.audio"))
    rng = np.random.default_rng(seed)
    for value in (params.conv1_b, params.conv2_b, params.dense_b):
        value[...] = 0.1 * rng.standard_normal(value.shape)
    return params


class TestAudioSummarizer:
    def test_zero_spectrogram_gives_dense_bias(self):
        params = AudioSummarizerParams.initialize(3, component_rng(0, "test.audio"))
        params.dense_b[...] = [1.0, -2.0, 0.5]
        out, _ = audio_summarize(params, np.zeros((6, 8)))
        np.testing.assert_allclose(out, [1.0, -2.0, 0.5])

    @pytest.mark.parametrize("shape", [(4, 4), (5, 9), (6, 8), (48, 17)])
    def test_output_dimension(self, shape):
        out, _ = audio_summarize(random_audio(5, 1), np.random.default_rng(2).standard_normal(shape))
        assert out.shape == (5,)

    @pytest.mark.parametrize("shape", [(3, 8), (8, 3), (8,)])
    def test_rejects_small_or_malformed_input(self, shape):
        with pytest.raises(ShapeError):
            audio_summarize(random_audio(2, 0), np.ones(shape))

    def test_rejects_non_finite_input(self):
        spectrogram = np.ones((6, 6))
        spectrogram[2, 3] = np.nan
        with pytest.raises(NumericalError):
            audio_summarize(random_audio(2, 0), spectrogram)

    def test_constant_input_matches_scalar_oracle(self):
        params = random_audio(3, 4)
        c = 0.7
        # edge padding keeps every conv1 output equal to the same scalar per channel
        level1 = [max(0.0, c * params.conv1_W[k, 0].sum() + params.conv1_b[k]) for k in range(8)]
        level2 = [max(0.0, sum(level1[j] * params.conv2_W[k, j].sum() for j in range(8)) + params.conv2_b[k])
                  for k in range(16)]
        expected = params.dense_W @ np.array(level2) + params.dense_b

        out, cache = audio_summarize(params, np.full((8, 8), c))
        np.testing.assert_allclose(cache.summary, level2, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-12)

    def test_gradients_match_finite_differences(self):
        params = random_audio(3, 5)
        rng = np.random.default_rng(6)
        spectrogram = rng.standard_normal((6, 8))
        upstream = rng.standard_normal(3)

        _, cache = audio_summarize(params, spectrogram)
        grads, dspec = audio_summarize_backward(upstream, cache, params)
        tensors = params.named_tensors("audio")
        tensors["spectrogram"] = spectrogram
        analytic = {f"audio.{name}": value for name, value in grads.items()}
        analytic["spectrogram"] = dspec

        report = gradient_check(lambda: float(upstream @ audio_summarize(params, spectrogram)[0]),
                                tensors, analytic, tolerance=1e-5)
        assert report.passed, report

    def test_stale_cache(self):
        _, cache = audio_summarize(random_audio(2, 0), np.ones((4, 4)))
        with pytest.raises(StaleCacheError):
            audio_summarize_backward(np.ones(2), cache, random_audio(2, 0))


def test_max_pool_routes_to_single_argmax_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(20):
        x = rng.integers(0, 3, size=(2, 5, 4)).astype(float)
        out, cache = max_pool2x2_forward(x)
        dout = rng.standard_normal(out.shape)
        dx = max_pool2x2_backward(dout, cache)
        for c in range(2):
            for i in range(2):
                for j in range(2):
                    window = [(2 * i + a, 2 * j + b) for a in range(2) for b in range(2)]
                    values = [x[c, r, s] for r, s in window]
                    winner = window[int(np.argmax(values))]
                    assert out[c, i, j] == max(values)
                    for cell in window:
                        expected = dout[c, i, j] if cell == winner else 0.0
                        assert dx[c, cell[0], cell[1]] == expected
        assert not np.any(dx[:, 4, :])


class TestTextSummarizer:
    def test_zero_params_give_zero_sentence(self):
        sentence, _ = text_summarize(GruCellParams.zeros(4, 3), np.ones((2, 4)))
        np.testing.assert_array_equal(sentence, np.zeros(3))

    def test_single_word_equals_one_cell_step(self):
        params = GruCellParams.initialize(4, 3, component_rng(1, "test.text"))
        word = np.random.default_rng(1).standard_normal(4)
        sentence, _ = text_summarize(params, word[np.newaxis])
        expected, _ = gru_cell_forward(word, np.zeros(3), params)
        np.testing.assert_array_equal(sentence, expected)

    def test_rejects_empty_sequence(self):
        with pytest.raises(ShapeError):
            text_summarize(GruCellParams.zeros(4, 3), np.zeros((0, 4)))

    def test_gradients_match_finite_differences(self):
        params = GruCellParams.initialize(4, 3, component_rng(2, "test.text"))
        rng = np.random.default_rng(3)
        words, upstream = rng.standard_normal((3, 4)), rng.standard_normal(3)
        _, trace = text_summarize(params, words)
        grads, dwords = text_summarize_backward(upstream, trace, params)

        tensors = params.named_tensors("text")
        tensors["words"] = words
        analytic = {f"text.{name}": value for name, value in grads.items()}
        analytic["words"] = dwords
        report = gradient_check(lambda: float(upstream @ text_summarize(params, words)[0]), tensors, analytic)
        assert report.passed, report


class TestLabelHead:
    def test_multitask_half_outputs_give_ln2(self):
        result = multitask_loss(0.3, np.full(3, 0.5), np.array([1.0, 0.0, 1.0]), weight=2.0)
        assert result.label_loss == pytest.approx(np.log(2.0))
        assert result.total == pytest.approx(0.3 + 2.0 * np.log(2.0))

    def test_zero_weight_leaves_caption_loss_exactly(self):
        result = multitask_loss(0.4217, np.array([0.2, 0.9]), np.array([1.0, 0.0]), weight=0.0)
        assert result.total == 0.4217
        assert not np.any(result.doutputs)

    def test_perfect_prediction_hits_clamp_floor(self):
        result = multitask_loss(0.0, np.array([1.0, 0.0, 1.0]), np.array([1.0, 0.0, 1.0]), weight=1.0)
        assert result.label_loss == pytest.approx(-np.log(1.0 - 1e-7), rel=1e-6)

    def test_rejects_labels_outside_unit_interval(self):
        with pytest.raises(DataError):
            multitask_loss(0.0, np.full(2, 0.5), np.array([1.5, 0.0]), weight=1.0)
        with pytest.raises(DataError):
            multitask_loss(0.0, np.full(2, 0.5), np.array([1.0, 0.0]), weight=-1.0)

    def test_head_gradients_match_finite_differences(self):
        rng = np.random.default_rng(4)
        head = LabelHeadParams.initialize(5, 3, component_rng(4, "test.head"))
        feature, labels = rng.standard_normal(5), np.array([1.0, 0.0, 0.5])

        def objective():
            return multitask_loss(0.0, label_head_forward(head, feature), labels, 0.7).total

        outputs = label_head_forward(head, feature)
        step = multitask_loss(0.0, outputs, labels, 0.7)
        dfeature, grads = label_head_backward(step.doutputs, feature, outputs, head)
        report = gradient_check(objective, {"W": head.W, "b": head.b, "feature": feature},
                                {"W": grads["W"], "b": grads["b"], "feature": dfeature})
        assert report.passed, report


def small_bundle(seed: int, with_head: bool = True) -> FullyTrainBundle:
    return FullyTrainBundle.initialize(audio_dim=3, word_dim=4, hidden_size=3, sentence_dim=3, num_labels=2,
                                       seed=seed, with_head=with_head)


def raw_tracks(seed: int):
    rng = np.random.default_rng(seed)
    return [
        RawTrack(rng.standard_normal((6, 8)), rng.standard_normal((2, 4)), np.array([1.0, 0.0])),
        RawTrack(rng.standard_normal((6, 8)), np.zeros((0, 4)), np.array([0.0, 1.0])),
    ]


def _window_gaps(activated: np.ndarray) -> np.ndarray:
    """Largest minus second largest value of every 2x2 pool window whose largest value is positive"""
    channels, rows, cols = activated.shape
    cropped = activated[:, :rows // 2 * 2, :cols // 2 * 2]
    windows = cropped.reshape(channels, rows // 2, 2, cols // 2, 2).transpose(0, 1, 3, 2, 4)
    ordered = np.sort(windows.reshape(channels, rows // 2, cols // 2, 4), axis=-1)
    top = ordered[..., -1]
    return (top - ordered[..., -2])[top > 0]


def clear_of_kinks(bundle: FullyTrainBundle, tracks, margin: float = 1e-4) -> bool:
    """No ReLU input and no pool-window runner-up within margin of switching"""
    for track in tracks:
        _, cache = audio_summarize(bundle.audio, track.spectrogram)
        for pre in (cache.pre1, cache.pre2):
            gaps = _window_gaps(np.maximum(pre, 0.0))
            if np.min(np.abs(pre)) < margin or (gaps.size and np.min(gaps) < margin):
                return False
    return True


def kink_free_instance(seed: int):
    """Bundle with random biases, two tracks and three targets, redrawn until the conv path is smooth"""
    for attempt in range(100):
        rng = np.random.default_rng([seed, attempt])
        bundle = small_bundle(seed)
        for value in bundle.parameters().values():
            if value.ndim == 1:
                value[...] = 0.1 * rng.standard_normal(value.shape)
        tracks = [
            RawTrack(rng.standard_normal((6, 8)), rng.standard_normal((2, 4)), np.array([1.0, 0.0])),
            RawTrack(rng.standard_normal((6, 8)), np.zeros((0, 4)), np.array([0.0, 1.0])),
        ]
        targets = rng.standard_normal((3, 4))
        if clear_of_kinks(bundle, tracks):
            return bundle, tracks, targets
    raise AssertionError(f"no smooth instance for seed {seed}")


class TestBundle:
    def test_parameter_names_are_prefixed(self):
        names = list(small_bundle(0).parameters())
        assert names[0] == "audio.conv1.W"
        assert "text.W_z" in names and "head.W" in names and "seq2seq.proj.W" in names
        assert not any(name.startswith("head.") for name in small_bundle(0, with_head=False).parameters())

    def test_head_does_not_perturb_other_initialization(self):
        with_head, without = small_bundle(3), small_bundle(3, with_head=False)
        for name, value in without.parameters().items():
            np.testing.assert_array_equal(value, with_head.parameters()[name])

    def test_track_features_use_zero_sentence_without_metadata(self):
        bundle = small_bundle(1)
        features = track_features(bundle, raw_tracks(1))
        assert features.shape == (2, 6)
        np.testing.assert_array_equal(features[1, 3:], np.zeros(3))

    def test_rejects_empty_playlist(self):
        with pytest.raises(ShapeError):
            track_features(small_bundle(0), [])

    @pytest.mark.parametrize("seed", range(20))
    def test_end_to_end_gradients_match_finite_differences(self, seed):
        bundle, tracks, targets = kink_free_instance(seed)
        result = bundle_loss(bundle, tracks, targets, label_weight=0.8)
        assert set(result.grads) == set(bundle.parameters())
        report = gradient_check(lambda: bundle_loss(bundle, tracks, targets, 0.8, compute_grads=False).total,
                                bundle.parameters(), result.grads, tolerance=1e-5)
        assert report.passed, report

    def test_forward_only_loss_matches_training_loss(self):
        bundle = small_bundle(8)
        tracks = raw_tracks(9)
        targets = np.random.default_rng(10).standard_normal((2, 4))
        with_grads = bundle_loss(bundle, tracks, targets, 1.0)
        forward = bundle_loss(bundle, tracks, targets, 1.0, compute_grads=False)
        assert forward.total == pytest.approx(with_grads.total, rel=1e-12)
        assert forward.label_loss == pytest.approx(with_grads.label_loss, rel=1e-12)

    def test_zero_label_weight_matches_headless_bundle(self):
        with_head, without = small_bundle(11), small_bundle(11, with_head=False)
        tracks = raw_tracks(12)
        targets = np.random.default_rng(13).standard_normal((2, 4))
        a = bundle_loss(with_head, tracks, targets, 0.0)
        b = bundle_loss(without, tracks, targets, 0.0)
        assert a.total == b.total
        for name, value in b.grads.items():
            np.testing.assert_array_equal(a.grads[name], value)
        assert not np.any(a.grads["head.W"]) and not np.any(a.grads["head.b"])
