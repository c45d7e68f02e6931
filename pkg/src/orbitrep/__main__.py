from orbitrep.cli import main

raise SystemExit(main())
