"""Export the 128x128 test crops used by the acceptance suite."""
import pathlib

from PIL import Image
from skimage import data

CROPS = {
    "astronaut": (data.astronaut, 50, 150),
    "coffee": (data.coffee, 100, 200),
    "chelsea": (data.chelsea, 60, 150),
}
SIZE = 128


def main() -> None:
    out = pathlib.Path(__file__).resolve().parent.parent / "tests" / "data"
    out.mkdir(parents=True, exist_ok=True)
    for name, (load, row, col) in CROPS.items():
        crop = load()[row:row + SIZE, col:col + SIZE, :3]
        Image.fromarray(crop).save(out / f"{name}.png")


if __name__ == "__main__":
    main()
