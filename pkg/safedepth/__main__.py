from safedepth.main import main

main()
