import numpy as np
import pytest

from src.architectures import (
    ARCHITECTURES,
    MOD_DOT_CONV_COUNT,
    MOD_DOT_FC_COUNT,
    Cascade,
    build_model,
)
from src.architectures.networks import (
    BRIDGE_COUNT,
    CONV_DECODER_COUNT,
    CONV_ENCODER_COUNT,
    DATA_DECODER_COUNT,
    DATA_ENCODER_COUNT,
    DENOISER_COUNT,
    FC_DECODER_COUNT,
    FC_ENCODER_COUNT,
    NetworkSpec,
    build_bridge,
    build_data_ae,
    build_denoiser,
    build_signal_ae_conv,
    build_signal_ae_fc,
    conv_latent_shape,
)
from src.autodiff import Linear, Sequential, Tanh
from src.errors import ArchitectureError

SMALL_IMAGE = (8, 16)


def test_data_autoencoder_counts():
    """Test the data encoder and decoder at the default sizes"""
    encoder, decoder = build_data_ae()
    assert encoder.parameter_count() == DATA_ENCODER_COUNT == 3_040_800
    assert decoder.parameter_count() == DATA_DECODER_COUNT == 3_043_800
    assert encoder.output_shape == (800,)
    assert decoder.output_shape == (3800,)


def test_bridge_count():
    """Test seven square layers between the latent spaces"""
    bridge = build_bridge()
    assert bridge.parameter_count() == BRIDGE_COUNT == 4_485_600
    assert len(bridge.module) == 14


def test_conv_signal_autoencoder():
    """Test layer shapes and counts of the convolutional autoencoder"""
    encoder, decoder = build_signal_ae_conv()
    assert encoder.parameter_count() == CONV_ENCODER_COUNT == 1612
    assert decoder.parameter_count() == CONV_DECODER_COUNT == 809
    assert [s[1:] for s in encoder.layer_shapes] == [
        (16, 40, 80),
        (16, 40, 80),
        (16, 20, 40),
        (8, 20, 40),
        (8, 20, 40),
        (8, 10, 20),
        (4, 10, 20),
        (4, 10, 20),
        (800,),
    ]
    assert [s[1:] for s in decoder.layer_shapes] == [
        (4, 10, 20),
        (8, 20, 40),
        (8, 20, 40),
        (16, 40, 80),
        (16, 40, 80),
        (1, 40, 80),
        (1, 40, 80),
    ]


def test_fc_signal_autoencoder():
    """Test the fully connected autoencoder counts"""
    encoder, decoder = build_signal_ae_fc()
    assert encoder.parameter_count() == FC_ENCODER_COUNT == 2_560_800
    assert decoder.parameter_count() == FC_DECODER_COUNT == 2_563_200
    assert decoder.output_shape == (1, 40, 80)


def test_denoiser():
    """Test the shape-preserving denoiser"""
    denoiser = build_denoiser()
    assert denoiser.parameter_count() == DENOISER_COUNT == 185_217
    assert denoiser.layer_shapes[-1][1:] == (1, 40, 80)
    channels = [s[1] for s in denoiser.layer_shapes[::2]]
    assert channels == [32, 64, 128, 64, 32, 1]


@pytest.mark.parametrize(
    "architecture,expected",
    [("mod-dot-conv", MOD_DOT_CONV_COUNT), ("mod-dot-fc", MOD_DOT_FC_COUNT)],
)
def test_composite_counts(architecture, expected):
    """Test the end-to-end parameter counts at the default sizes"""
    model = build_model(architecture, denoiser=True)
    assert model.inference_parameter_count() == expected
    assert model.latent_size == 800


def test_composite_constants():
    """Test the composite constants themselves"""
    assert MOD_DOT_CONV_COUNT == 7_712_426
    assert MOD_DOT_FC_COUNT == 10_274_817


def test_declared_count_is_enforced():
    """Test that a network disagreeing with its declaration is rejected"""
    module = Sequential([Linear(4, 3), Tanh()])
    with pytest.raises(ArchitectureError, match="Parameter count"):
        NetworkSpec("broken", module, (4,), (3,), 16)
    with pytest.raises(ArchitectureError, match="Output shape"):
        NetworkSpec("broken", module, (4,), (2,), 15)


def test_conv_latent_shape():
    """Test the bottleneck shape rule"""
    assert conv_latent_shape((40, 80)) == (4, 10, 20)
    assert conv_latent_shape(SMALL_IMAGE) == (4, 2, 4)
    with pytest.raises(ArchitectureError):
        conv_latent_shape((10, 20))


def test_small_conv_model_latent_follows_image():
    """Test that conv architectures size the latent from the image"""
    model = build_model("mod-dot-conv", image_shape=SMALL_IMAGE, n_measurements=36, latent_size=999)
    assert model.latent_size == 32
    assert model["bridge"].input_shape == (32,)
    out = model.reconstructor()(np.random.default_rng(0).random((3, 36)).astype(np.float32))
    assert out.shape == (3, 1, 8, 16)
    assert np.all((out.data > 0) & (out.data < 1))


@pytest.mark.parametrize("architecture", ARCHITECTURES)
def test_every_architecture_runs(architecture):
    """Test forward shapes of every architecture at small sizes"""
    model = build_model(architecture, image_shape=SMALL_IMAGE, n_measurements=36, latent_size=32, denoiser=True)
    assert model.uses_bridge == architecture.startswith("mod-dot")
    assert model.signal_kind == architecture.rsplit("-", 1)[-1]
    x = np.random.default_rng(1).random((2, 36)).astype(np.float32)
    assert model.inference()(x).shape == (2, 1, 8, 16)
    assert len(model.inference().stages) == len(model.reconstructor().stages) + 1


def test_e2e_is_mod_dot_without_bridge():
    """Test that removing the bridge from Mod-DOT gives the E2E network"""
    mod_dot = build_model("mod-dot-fc", image_shape=SMALL_IMAGE, n_measurements=36, latent_size=32, seed=4)
    e2e = build_model("e2e-fc", image_shape=SMALL_IMAGE, n_measurements=36, latent_size=32, seed=4)
    x = np.random.default_rng(2).random((2, 36)).astype(np.float32)
    stripped = mod_dot.reconstructor().without("bridge")
    assert [s.name for s in stripped.stages] == ["data_encoder", "signal_decoder"]
    assert np.array_equal(stripped(x).data, e2e.reconstructor()(x).data)


def test_cascade_rejects_mismatched_stages():
    """Test latent shape agreement between adjacent stages"""
    encoder, _ = build_data_ae(36, 32)
    _, decoder = build_signal_ae_fc(SMALL_IMAGE, 16)
    with pytest.raises(ArchitectureError, match="latent shape"):
        Cascade("broken", [encoder, decoder])


def test_seeded_initialization():
    """Test that a seed fixes every weight and networks use independent streams"""
    a = build_model("e2e-conv", image_shape=SMALL_IMAGE, n_measurements=36, seed=3)
    b = build_model("e2e-conv", image_shape=SMALL_IMAGE, n_measurements=36, seed=3)
    for (name, p), (_, q) in zip(a.named_parameters(), b.named_parameters()):
        assert np.array_equal(p.data, q.data), name
    c = build_model("e2e-conv", image_shape=SMALL_IMAGE, n_measurements=36, seed=4)
    assert not np.array_equal(a["data_encoder"].parameters()[0].data, c["data_encoder"].parameters()[0].data)


def test_parameter_names_are_unique():
    """Test qualified parameter names across networks"""
    model = build_model("mod-dot-conv", image_shape=SMALL_IMAGE, n_measurements=36, denoiser=True)
    names = list(model.parameter_dict())
    assert len(names) == len(set(names))
    assert "data_encoder.0.weight" in names
    assert "denoiser.10.bias" in names


def test_network_record():
    """Test the serialized network description"""
    record = build_signal_ae_conv(SMALL_IMAGE)[0].record()
    assert record.name == "signal_encoder"
    assert record.input_shape == [1, 8, 16]
    assert record.output_shape == [32]
    assert record.parameter_count == 1612
    assert record.layers[0].kind == "conv2d"
    assert record.layers[-1].output_shape == [-1, 32]


def test_unknown_architecture():
    """Test architecture names"""
    with pytest.raises(ArchitectureError):
        build_model("unet")
