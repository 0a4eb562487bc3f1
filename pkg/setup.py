"""
Quick Setup Script for the H1 UDF Engine
Installs requirements.txt one package at a time, then prepares .env and the R cache
"""

import os
import shutil
import subprocess
import sys

REQUIREMENTS_FILE = "requirements.txt"
# Without these the engine cannot import; the rest only affect reports and tests
ESSENTIAL = {"sympy", "python-dotenv"}


def run_command(command):
    """Run a command and return success status"""
    try:
        subprocess.run(command, check=True, capture_output=True, text=True)
        print(f"✅ {' '.join(command)}")
        return True
    except subprocess.CalledProcessError as e:
        print(f"❌ Failed: {' '.join(command)}")
        print(f"Error: {e.stderr}")
        return False


def read_requirements(path=REQUIREMENTS_FILE):
    with open(path, "r", encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip() and not line.startswith("#")]


def package_name(requirement):
    for marker in (">=", "==", "<", ">"):
        requirement = requirement.split(marker)[0]
    return requirement.strip()


def main():
    print("🚀 H1 UDF Engine - Quick Setup")
    print("===============================")

    pip = [sys.executable, "-m", "pip", "install"]
    if not run_command(pip + ["--upgrade", "pip"]):
        return False

    print(f"\n📦 Installing {REQUIREMENTS_FILE}...")
    missing = []
    for requirement in read_requirements():
        if not run_command(pip + [requirement]):
            missing.append(package_name(requirement))

    essential_missing = [name for name in missing if name in ESSENTIAL]
    if essential_missing:
        print(f"\n❌ Required packages failed: {', '.join(essential_missing)}")
        return False
    if missing:
        print(f"\n⚠️ Optional packages failed, continuing: {', '.join(missing)}")

    if not os.path.exists(".env") and os.path.exists(".env.template"):
        shutil.copy(".env.template", ".env")
        print("\n✅ Created .env from .env.template (UDF_* settings)")

    os.makedirs(os.getenv("UDF_CACHE", ".udf_cache"), exist_ok=True)

    print("\n✅ Setup complete!")
    print("🚀 Try: python cli.py compute-r --order 2")
    print("🧪 Tests: pytest -m 'not slow'")
    return True


if __name__ == "__main__":
    sys.exit(0 if main() else 1)
