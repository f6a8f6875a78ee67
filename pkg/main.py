from dotenv import load_dotenv

load_dotenv()

from router import cli  # noqa: E402


def main():
    cli()


if __name__ == "__main__":
    main()
