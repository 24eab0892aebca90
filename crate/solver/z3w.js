#!/usr/bin/env node
// SMT-LIB 2 solver process backed by the Z3 WebAssembly build.
//
// Reads SMT-LIB commands from stdin (one command per line; commands may
// span lines, completion is detected by parenthesis balance), evaluates
// each complete command, and writes solver output (check-sat verdicts,
// models, errors) to stdout. State persists across commands within one
// process; (reset) clears it and (exit) or EOF terminates.

'use strict';

const path = require('path');
const readline = require('readline');
const { init } = require(path.join(__dirname, 'node_modules', 'z3-solver'));

function parenBalance(line) {
  let n = 0;
  for (let i = 0; i < line.length; i++) {
    const c = line[i];
    if (c === ';') break;
    if (c === '(') n++;
    else if (c === ')') n--;
  }
  return n;
}

async function main() {
  const { Z3, em } = await init();
  const cfg = Z3.mk_config();
  let ctx = Z3.mk_context(cfg);

  const shutdown = (code) => {
    try { Z3.del_context(ctx); } catch (_) {}
    try { em.PThread.terminateAllThreads(); } catch (_) {}
    process.exit(code);
  };

  // Call the synchronous eval export directly. The async binding passes
  // the command string through a stack allocation that is reclaimed while
  // the solver thread is still reading it, which intermittently corrupts
  // commands; the blocking call has no such race and this process has
  // nothing else to do anyway.
  const evalSync = (cmd) =>
    em.ccall('Z3_eval_smtlib2_string', 'string', ['number', 'string'], [ctx, cmd]);

  const evalCmd = (cmd) => {
    const trimmed = cmd.trim();
    if (trimmed === '') return;
    if (trimmed === '(exit)') shutdown(0);
    if (trimmed === '(reset)') {
      Z3.del_context(ctx);
      ctx = Z3.mk_context(cfg);
      return;
    }
    let out;
    try {
      // The incremental SMT-LIB parser needs the trailing newline to
      // finish the last token cleanly.
      out = evalSync(cmd + '\n');
    } catch (e) {
      out = `(error "${String(e).replace(/"/g, "'")}")`;
    }
    if (out && out.trim() !== '') {
      process.stdout.write(out.trim() + '\n');
    }
  };

  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  let pending = '';
  let balance = 0;
  rl.on('line', (line) => {
    pending += (pending === '' ? '' : '\n') + line;
    balance += parenBalance(line);
    if (balance <= 0 && pending.trim() !== '') {
      const cmd = pending;
      pending = '';
      balance = 0;
      evalCmd(cmd);
    }
  });
  rl.on('close', () => {
    shutdown(0);
  });
}

main().catch((e) => {
  process.stderr.write(String(e) + '\n');
  process.exit(2);
});
