import pytest

from phycnn.data import Manifest, ManifestRow

from rawutil import channel_image, pack_raw


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory):
    """20 channel samples of varying width with k ~ width^4 labels.

    Widths repeat so both splits cover the same geometry family; the
    label follows the duct scaling law, so a useful regressor only needs
    to read the channel width (or the f_max feature, which equals
    width^2).
    """
    raw_dir = tmp_path_factory.mktemp("toy")
    size = 50
    rows = []
    widths = [2, 3, 4, 5, 6, 7, 8, 9, 10, 11] * 2
    for i, width in enumerate(widths):
        sid = f"toy{i:03d}"
        pack_raw(raw_dir / f"{sid}.raw", channel_image(size, width))
        k_md = 5.0 * width**4  # duct permeability scaling
        rows.append(
            ManifestRow(
                id=sid,
                f_max=width * width,
                k_cmp_md=k_md,
                split="val" if i >= 16 else "train",
            )
        )
    manifest = Manifest(voxel_edge=2.25e-6, size=size, rows=rows)
    return manifest, raw_dir
