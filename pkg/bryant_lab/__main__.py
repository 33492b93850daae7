from bryant_lab.cli import main

raise SystemExit(main())
