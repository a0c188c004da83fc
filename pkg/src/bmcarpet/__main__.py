from bmcarpet.cli import main

main()
