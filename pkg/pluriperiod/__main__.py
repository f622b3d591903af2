from pluriperiod.main import main

raise SystemExit(main())
