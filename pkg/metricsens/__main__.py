from metricsens.cli.main import main

raise SystemExit(main())
