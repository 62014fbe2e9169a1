import sys
import os

PROJECT_FOLDER = os.path.dirname(os.path.abspath(__file__))
PARENT_PROJECT_FOLDER = os.path.dirname(PROJECT_FOLDER)
sys.path.append(os.path.join(PARENT_PROJECT_FOLDER, "src"))

from fusion.cli import main
from dotenv import load_dotenv


if __name__ == "__main__":
    load_dotenv()
    sys.exit(main())
